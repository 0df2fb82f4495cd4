typedef int Int32;

Int32 BZ2_decompress(Int32 state)
{
    while (state > 0) state -= 1;
    return state;
}
