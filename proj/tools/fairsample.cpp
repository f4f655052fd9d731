#include <iostream>

#include "fairsample/pipeline.hpp"

int main(int argc, char** argv) {
    return fairsample::pipeline::run_cli(argc, argv, std::cout, std::cerr);
}
