#pragma once

#include <memory>
#include <string>
#include <thread>

#include "imgclust/review/service.hpp"

namespace imgclust::review {

// JSON-over-HTTP front end for ReviewService. Errors come back as
// {"error": {"code": ..., "message": ...}} with a matching status code.
class HttpApi {
 public:
  explicit HttpApi(ReviewService& service);
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  // Binds the socket; port 0 picks a free one. Returns the bound port.
  // Throws RuntimeFailure if the address cannot be bound.
  int bind(const std::string& host, int port);
  // Serves until stop(). Call bind() first.
  void listen();
  // bind() + listen() on a background thread; returns the bound port once
  // the server accepts connections.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace imgclust::review
