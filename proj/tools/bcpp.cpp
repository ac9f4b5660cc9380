#include <iostream>

#include "bcpp/cli.hpp"

int main(int argc, char** argv) { return bcpp::dispatch(argc, argv, std::cout, std::cerr); }
