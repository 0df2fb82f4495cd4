typedef int Int32;

Int32 BZ2_bzCompressInit(Int32 level)
{
    if (level < 1) return -2;
    return 0;
}
