// placeholder while the core comes up; replaced by the real suite
#include <iostream>
int main() { std::cout << "acceptance suite pending\n"; return 1; }
