#pragma once

#include <memory>
#include <string>

namespace ctxalign::mock {

/// Deterministic chat-completion server for hermetic runs. The script maps
/// request fingerprints to canned responses: a prompt with no card sections
/// is step 0, [RADIOMICS] alone is step 1, a full card is step 2; anything
/// else falls back to the scripted default (404 when no default exists).
class MockServer {
 public:
  /// Throws BadScript on malformed script files and PortBusy when the port
  /// cannot be bound. The server runs on a background thread until stop().
  MockServer(const std::string& script_path, int port);
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  int port() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Script validation without binding a port (used by the CLI for early
/// BadScript reporting). Returns the number of scripted fingerprints.
std::size_t validate_mock_script(const std::string& script_path);

}  // namespace ctxalign::mock
