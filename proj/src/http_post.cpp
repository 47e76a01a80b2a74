#include "http_post.hpp"

#include <httplib.h>

#include "hoprag/error.hpp"

namespace hoprag::detail {

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::Config, "URL without scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse http_post_json(const std::string& url, const std::string& body,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            double timeout_s) {
    auto [base, path] = split_url(url);
    httplib::Client client(base);
    auto seconds = static_cast<time_t>(timeout_s);
    auto usec = static_cast<time_t>((timeout_s - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, usec);
    client.set_read_timeout(seconds, usec);
    client.set_write_timeout(seconds, usec);

    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);

    HttpResponse out;
    auto res = client.Post(path, hdrs, body, "application/json");
    if (!res) {
        out.timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::Write ||
                        res.error() == httplib::Error::ConnectionTimeout;
        out.transport_error = httplib::to_string(res.error());
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

}  // namespace hoprag::detail
