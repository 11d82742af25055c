#pragma once

// httplib-backed transport for live/record mode. Kept out of gateway.hpp so
// tests and offline builds never pull in the HTTP stack.

#include <string>

#include "tulukit/gateway.hpp"

#include "httplib.h"

namespace tulu {

class HttpTransport final : public Transport {
public:
    explicit HttpTransport(int timeout_s = 60) : timeout_s_(timeout_s) {}

    HttpResponse post(const std::string& url,
                      const std::vector<std::pair<std::string, std::string>>& headers,
                      const std::string& body) override {
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw Error("malformed url: " + url);
        auto path_begin = url.find('/', scheme_end + 3);
        std::string origin = path_begin == std::string::npos ? url : url.substr(0, path_begin);
        std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);

        httplib::Client client(origin);
        client.set_connection_timeout(timeout_s_);
        client.set_read_timeout(timeout_s_);
        httplib::Headers h;
        std::string content_type = "application/json";
        for (const auto& [k, v] : headers) {
            if (k == "Content-Type") content_type = v;
            else h.emplace(k, v);
        }
        auto res = client.Post(path, h, body, content_type);
        if (!res) throw Error("transport failure: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

private:
    int timeout_s_;
};

}  // namespace tulu
