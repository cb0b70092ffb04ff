#include "tvflow/experiment.hpp"

int main(int argc, char** argv) { return tvflow::cli_main(argc, argv); }
