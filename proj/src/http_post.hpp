#pragma once

#include <string>
#include <utility>
#include <vector>

namespace hoprag::detail {

struct HttpResponse {
    int status = 0;  // 0 when the transport failed
    std::string body;
    bool timed_out = false;
    std::string transport_error;
};

/// POSTs a JSON body to a full URL (http:// or https://).
HttpResponse http_post_json(const std::string& url, const std::string& body,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            double timeout_s);

}  // namespace hoprag::detail
