#pragma once

/// Command-line entry point; returns the process exit code.
int run(int argc, char** argv);
