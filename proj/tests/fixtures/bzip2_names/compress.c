typedef int Int32;

Int32 BZ2_compressBlock(Int32 n)
{
    Int32 total = 0;
    Int32 i;
    for (i = 0; i < n; i++) total += i;
    return total;
}
