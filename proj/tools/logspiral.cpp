#include <vector>

#include "logspiral/app.hpp"

int main(int argc, char** argv) {
  return logspiral::app::run_app(std::vector<std::string>(argv + 1, argv + argc));
}
