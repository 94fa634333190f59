# Run timing and the script-mode test runner
