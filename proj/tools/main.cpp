#include "fracopt/experiment.hpp"

int main(int argc, char** argv) { return fracopt::experiment_main(argc, argv); }
