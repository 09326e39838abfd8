#include "tempogan/cli.hpp"

int main(int argc, char** argv) {
    return tempogan::cli_dispatch({argv + 1, argv + argc});
}
