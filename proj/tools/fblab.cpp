#include <cstdio>

int main(int argc, char** argv) {
    (void)argc;
    (void)argv;
    std::fprintf(stderr, "fblab: command-line driver not implemented yet\n");
    return 2;
}
