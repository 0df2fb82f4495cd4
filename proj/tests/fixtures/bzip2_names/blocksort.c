/* block sorting machinery */
typedef unsigned int UInt32;
typedef int Int32;

static void fallbackSimpleSort(UInt32* fmap, UInt32* eclass, Int32 lo, Int32 hi)
{
    Int32 i;
    for (i = lo; i < hi; i++) {
        if (eclass[fmap[i]] > eclass[fmap[i + 1]]) {
            UInt32 tmp = fmap[i];
            fmap[i] = fmap[i + 1];
            fmap[i + 1] = tmp;
        }
    }
}

void BZ2_blockSort(UInt32* arr, Int32 n)
{
    Int32 pass;
    for (pass = 0; pass < n; pass++)
        fallbackSimpleSort(arr, arr, 0, n - 1);
}
