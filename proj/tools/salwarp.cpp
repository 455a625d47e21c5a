#include "salwarp/cli.hpp"

int main(int argc, char** argv) { return salwarp::cli::run(argc, argv); }
