#pragma once

#include <map>
#include <memory>
#include <string>

#include <json.hpp>

#include "ehcp/bundle.hpp"
#include "ehcp/model_file.hpp"

namespace ehcp {

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceDefaults {
  std::size_t imputations = 100;
  ImputationMode mode = ImputationMode::joint;
  double grid_step = 0.5;
  std::uint64_t seed = 1;
};

/// Read-only query handlers over an immutable model and data bundle.
/// Safe to call concurrently.
class EhcpService {
 public:
  EhcpService(ModelFile model, DataBundle data, ServiceDefaults defaults = {});

  ServiceResponse handle(const std::string& method, const std::string& path,
                         const std::map<std::string, std::string>& query, const std::string& body) const;

  const ModelFile& model() const { return model_; }
  const DataBundle& data() const { return data_; }

 private:
  ServiceResponse list_plays() const;
  ServiceResponse get_play(const PlaySequence& play) const;
  ServiceResponse trajectories(const PlaySequence& play, const std::map<std::string, std::string>& query) const;
  ServiceResponse whatif(const nlohmann::json& body) const;
  ServiceResponse predict(const nlohmann::json& body) const;
  ServiceResponse model_info() const;
  ServiceResponse importance() const;
  ServiceResponse pdp(const std::map<std::string, std::string>& query) const;

  ModelFile model_;
  DataBundle data_;
  ServiceDefaults defaults_;
  MissingPartition partition_;
};

/// HTTP front end; handlers run on the server's worker threads.
class HttpServer {
 public:
  explicit HttpServer(const EhcpService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds (port 0 picks a free port), serves in the background, returns the port.
  int start(const std::string& host, int port);
  void stop();
  /// Blocks until stop() is called from elsewhere.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ehcp
