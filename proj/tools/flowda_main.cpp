// Placeholder entry point; subcommands land together with the trainer.
#include <cstdio>

int main() {
  std::puts("flowda: commands not wired up yet");
  return 1;
}
