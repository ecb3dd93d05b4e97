#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <httplib.h>

namespace stepeval::detail {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always starts with '/'
};

/// nullopt unless the URL is http(s)://host[:port][/path].
std::optional<ParsedUrl> parse_url(std::string_view url);

std::unique_ptr<httplib::Client> make_client(const ParsedUrl& url, int timeout_ms);

}  // namespace stepeval::detail
