#pragma once

#include <map>
#include <string>
#include <string_view>

namespace amiroar {

struct HttpRequest {
  std::string method;
  std::string url;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;

  bool ok() const { return status >= 200 && status < 300; }
};

/// Path component of an absolute or relative URL, without query string.
/// `https://sdn-switch.com:10443/stats/flowentry/add` -> `/stats/flowentry/add`.
std::string url_path(std::string_view url);

HttpResponse json_response(int status, std::string_view body);
HttpResponse error_response(int status, std::string_view message);

}  // namespace amiroar
