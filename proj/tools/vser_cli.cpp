#include <cstdio>
int main() { std::puts("cli: not implemented"); return 1; }
