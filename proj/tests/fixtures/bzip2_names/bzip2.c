#include <stdio.h>

int numFileNames;
int numFilesProcessed;

int main(int argc, char** argv)
{
    (void)argc;
    (void)argv;
    numFileNames = 0;
    numFilesProcessed = 0;
    printf("ok\n");
    return 0;
}
