#include <cstdio>
int main(){ std::puts("ckcli placeholder"); return 0; }
