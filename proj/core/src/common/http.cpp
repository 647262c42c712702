#include "amiroar/common/http.hpp"

#include <nlohmann/json.hpp>

namespace amiroar {

std::string url_path(std::string_view url) {
  auto scheme = url.find("://");
  if (scheme != std::string_view::npos) {
    auto slash = url.find('/', scheme + 3);
    url = slash == std::string_view::npos ? std::string_view{"/"} : url.substr(slash);
  } else if (auto colon = url.find(':'); colon != std::string_view::npos && url.find('/') != 0) {
    url = url.substr(colon + 1);  // opaque scheme such as `manual:task`
  }
  if (auto q = url.find('?'); q != std::string_view::npos) url = url.substr(0, q);
  return std::string(url.empty() ? "/" : url);
}

HttpResponse json_response(int status, std::string_view body) {
  return HttpResponse{status, std::string(body)};
}

HttpResponse error_response(int status, std::string_view message) {
  return HttpResponse{status, nlohmann::json{{"error", message}}.dump()};
}

}  // namespace amiroar
