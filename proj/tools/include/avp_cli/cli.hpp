#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "avp/service.hpp"

namespace avp::cli {

// Runs one command. `args` excludes the program name. Returns the process
// exit code: 0 success, 1 validation or usage error, 2 IO / format error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// HTTP front end for a PredictionService: POST /predict, GET /health.
class HttpFrontend {
 public:
  explicit HttpFrontend(const PredictionService& service);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws IoError.
  int bind(const std::string& host, int port);
  // Serves until stop() is called from another thread.
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace avp::cli
