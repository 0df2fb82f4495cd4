typedef int Int32;

void BZ2_hbCreateDecodeTables(Int32* limit, Int32 n)
{
    Int32 i;
    for (i = 0; i < n; i++) limit[i] = i;
}
