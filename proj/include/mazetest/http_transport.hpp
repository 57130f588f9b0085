#pragma once

// Needs OpenSSL::SSL at link time for https endpoints.
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include "mazetest/gateway.hpp"

namespace mazetest {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw DomainError("endpoint is not an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const ParsedUrl u = split_url(request.url);
    httplib::Client client(u.origin);
    const auto secs = static_cast<time_t>(request.timeout_s);
    const auto usecs = static_cast<time_t>((request.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : request.headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        headers.emplace(k, v);
      }
    }
    HttpResponse out;
    auto res = client.Post(u.path, headers, request.body, content_type);
    if (!res) {
      const auto err = res.error();
      out.error = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) ? NetError::Timeout
                                                                                            : NetError::Connection;
      out.error_detail = httplib::to_string(err);
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    if (res->has_header("Retry-After")) {
      try {
        out.retry_after_s = std::stod(res->get_header_value("Retry-After"));
      } catch (const std::exception&) {
        // HTTP-date form; fall back to computed backoff.
      }
    }
    return out;
  }
};

}  // namespace mazetest
