#include <cstdio>

int main() {
    std::printf("rai cli placeholder\n");
    return 1;
}
