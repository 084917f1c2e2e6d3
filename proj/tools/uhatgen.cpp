#include <iostream>

#include "uhat/frontend.hpp"

int main(int argc, char** argv) { return uhat::cliMain(argc, argv, std::cout, std::cerr); }
