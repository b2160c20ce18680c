// Copyright 2026 The ncforensic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "httplib.h"

#include "ncf/transport.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "ncf/digest.hpp"
#include "ncf/encoding.hpp"
#include "ncf/error.hpp"

namespace ncf {
namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_idempotent_read(std::string_view method) {
  return method == "GET" || method == "HEAD" || method == "PROPFIND";
}

constexpr std::size_t kSnippetLength = 200;

}  // namespace

// Credentials -----------------------------------------------------------------

void Credentials::validate() const {
  if (username.empty()) {
    throw Error(ErrorKind::invalid_credentials, "username must not be empty");
  }
  if (username.find(':') != std::string::npos) {
    throw Error(ErrorKind::invalid_credentials,
                "username must not contain ':'");
  }
  try {
    parse_base_url(base_url);
  } catch (const Error& e) {
    throw Error(ErrorKind::invalid_credentials, e.what());
  }
}

std::string Credentials::account_id() const {
  const BaseUrl base = parse_base_url(base_url);
  std::string id = username + "@" + base.host;
  if (base.explicit_port) id += ":" + std::to_string(base.port);
  return id;
}

std::string Credentials::fingerprint() const {
  return sha256_hex(username + base_url);
}

std::string BaseUrl::origin() const {
  std::string out = scheme + "://" + host;
  if (explicit_port) out += ":" + std::to_string(port);
  return out;
}

BaseUrl parse_base_url(std::string_view url) {
  BaseUrl out;
  const auto sep = url.find("://");
  if (sep == std::string_view::npos) {
    throw Error(ErrorKind::input_error,
                "base URL must be absolute: " + std::string(url));
  }
  out.scheme = to_lower(url.substr(0, sep));
  if (out.scheme != "http" && out.scheme != "https") {
    throw Error(ErrorKind::input_error,
                "base URL scheme must be http or https: " + std::string(url));
  }
  if (url.find_first_of("?#") != std::string_view::npos) {
    throw Error(ErrorKind::input_error,
                "base URL must not carry a query or fragment: " +
                    std::string(url));
  }
  std::string_view rest = url.substr(sep + 3);
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  std::string_view path =
      slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
  if (authority.empty() || authority.find('@') != std::string_view::npos) {
    throw Error(ErrorKind::input_error,
                "base URL needs a host and no userinfo: " + std::string(url));
  }
  out.port = out.scheme == "https" ? 443 : 80;
  std::string_view host = authority;
  std::string_view port_text;
  bool has_port = false;
  if (authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) {
      throw Error(ErrorKind::input_error, "unterminated IPv6 literal: " + std::string(url));
    }
    host = authority.substr(0, close + 1);
    std::string_view after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') {
        throw Error(ErrorKind::input_error, "malformed authority: " + std::string(url));
      }
      port_text = after.substr(1);
      has_port = true;
    }
  } else if (const auto colon = authority.rfind(':');
             colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    port_text = authority.substr(colon + 1);
    has_port = true;
  }
  if (has_port) {
    int port = 0;
    auto [p, ec] = std::from_chars(port_text.data(),
                                   port_text.data() + port_text.size(), port);
    if (port_text.empty() || ec != std::errc{} ||
        p != port_text.data() + port_text.size() || port <= 0 ||
        port > 65535) {
      throw Error(ErrorKind::input_error,
                  "invalid port in base URL: " + std::string(url));
    }
    out.port = port;
    out.explicit_port = true;
  }
  if (host.empty()) {
    throw Error(ErrorKind::input_error, "base URL needs a host");
  }
  out.host = std::string(host);
  std::string p(path);
  while (!p.empty() && p.back() == '/') p.pop_back();
  out.path = p;
  return out;
}

std::string build_auth_header(const Credentials& credentials) {
  if (credentials.username.find(':') != std::string::npos) {
    throw Error(ErrorKind::invalid_credentials,
                "username must not contain ':'");
  }
  return "Basic " +
         base64_encode(credentials.username + ":" + credentials.app_password);
}

// MethodPolicy ----------------------------------------------------------------

bool MethodPolicy::allows(std::string_view method) const {
  return allowed_methods.count(std::string(method)) > 0;
}

MethodPolicy MethodPolicy::acquisition() {
  return {{"GET", "HEAD", "PROPFIND"}, "acquisition"};
}

MethodPolicy MethodPolicy::session_control() {
  return {{"GET", "HEAD", "PROPFIND", "DELETE"}, "session-control"};
}

// Ledger ----------------------------------------------------------------------

std::string_view to_string(RequestOutcome outcome) noexcept {
  switch (outcome) {
    case RequestOutcome::sent: return "sent";
    case RequestOutcome::blocked: return "blocked";
    case RequestOutcome::transport_error: return "transport-error";
  }
  return "unknown";
}

Json to_json(const RequestRecord& r) {
  Json j;
  j["sequence"] = r.sequence;
  j["method"] = r.method;
  j["url"] = r.url;
  j["context"] = r.context;
  j["outcome"] = std::string(to_string(r.outcome));
  if (r.outcome == RequestOutcome::sent) {
    j["status"] = r.status;
  } else {
    j["status"] = std::string(to_string(r.outcome));
  }
  j["started_at"] = format_instant(r.started_at);
  j["finished_at"] = format_instant(r.finished_at);
  j["response_digest"] = r.response_digest;
  return j;
}

RequestRecord request_record_from_json(const Json& j) {
  RequestRecord r;
  r.sequence = j.at("sequence").get<std::int64_t>();
  r.method = j.at("method").get<std::string>();
  r.url = j.at("url").get<std::string>();
  r.context = j.at("context").get<std::string>();
  const auto outcome = j.at("outcome").get<std::string>();
  if (outcome == "sent") {
    r.outcome = RequestOutcome::sent;
    r.status = j.at("status").get<int>();
  } else if (outcome == "blocked") {
    r.outcome = RequestOutcome::blocked;
  } else if (outcome == "transport-error") {
    r.outcome = RequestOutcome::transport_error;
  } else {
    throw Error(ErrorKind::parse_error, "unknown ledger outcome " + outcome);
  }
  auto parse_time = [&](const char* key) {
    auto t = parse_iso8601(j.at(key).get<std::string>());
    if (!t) throw Error(ErrorKind::parse_error, std::string("bad ") + key);
    return *t;
  };
  r.started_at = parse_time("started_at");
  r.finished_at = parse_time("finished_at");
  r.response_digest = j.at("response_digest").get<std::string>();
  return r;
}

RequestRecord RequestLedger::append(RequestRecord record) {
  std::lock_guard lock(mutex_);
  record.sequence = static_cast<std::int64_t>(records_.size()) + 1;
  records_.push_back(record);
  return record;
}

std::vector<RequestRecord> RequestLedger::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t RequestLedger::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::string RequestLedger::serialize() const {
  std::string out;
  for (const auto& r : records()) out += canonical_line(to_json(r));
  return out;
}

// Transport -------------------------------------------------------------------

std::string HttpResponse::header(std::string_view name) const {
  auto it = headers.find(to_lower(name));
  return it == headers.end() ? std::string{} : it->second;
}

ErrorKind error_kind_for_status(int status) noexcept {
  switch (status) {
    case 401: return ErrorKind::auth_failed;
    case 403: return ErrorKind::forbidden;
    case 404: return ErrorKind::not_found;
    default: return ErrorKind::http_error;
  }
}

Transport::Transport(Credentials credentials, TransportOptions options)
    : credentials_(std::move(credentials)), options_(std::move(options)) {
  credentials_.validate();
  base_ = parse_base_url(credentials_.base_url);
  auth_header_ = build_auth_header(credentials_);
  ledger_ = options_.ledger ? options_.ledger
                            : std::make_shared<RequestLedger>();
}

Transport::~Transport() = default;

std::string Transport::endpoint(std::string_view relative) const {
  while (!relative.empty() && relative.front() == '/') relative.remove_prefix(1);
  return base_.path + "/" + std::string(relative);
}

std::string Transport::absolute_url(std::string_view target) const {
  return base_.origin() + std::string(target);
}

void Transport::set_response_observer(ResponseObserver observer) {
  std::lock_guard lock(observer_mutex_);
  observer_ = std::move(observer);
}

HttpResponse Transport::send_once(const HttpRequest& request,
                                  bool& transport_failed,
                                  std::string& failure) {
  httplib::Client client(base_.origin());
  const auto t = static_cast<time_t>(options_.timeout.count());
  client.set_connection_timeout(t, 0);
  client.set_read_timeout(t, 0);
  client.set_write_timeout(t, 0);
  client.set_keep_alive(false);

  httplib::Request req;
  req.method = request.method;
  req.path = request.target;
  for (const auto& [k, v] : request.headers) req.set_header(k, v);
  req.set_header("Authorization", auth_header_);
  if (!req.has_header("User-Agent")) {
    req.set_header("User-Agent", options_.user_agent);
  }
  req.body = request.body;

  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  HttpResponse out;
  if (!client.send(req, res, err)) {
    transport_failed = true;
    failure = httplib::to_string(err);
    return out;
  }
  transport_failed = false;
  out.status = res.status;
  for (const auto& [k, v] : res.headers) out.headers[to_lower(k)] = v;
  out.body = std::move(res.body);
  return out;
}

HttpResponse Transport::execute(const HttpRequest& request,
                                const MethodPolicy& policy) {
  RequestRecord record;
  record.method = request.method;
  record.url = absolute_url(request.target);
  record.context = policy.context_label;
  record.started_at = now_utc();

  const std::string prefix = base_.path + "/";
  if (request.target.rfind(prefix, 0) != 0) {
    throw Error(ErrorKind::input_error,
                "request target outside base URL: " + request.target);
  }

  if (!policy.allows(request.method)) {
    record.outcome = RequestOutcome::blocked;
    record.finished_at = now_utc();
    ledger_->append(record);
    throw Error(ErrorKind::policy_violation,
                request.method + " is not permitted in " +
                    policy.context_label + " context");
  }

  const bool read = is_idempotent_read(request.method);
  std::unique_lock<std::mutex> mutating_lock(mutating_mutex_, std::defer_lock);
  if (!read) mutating_lock.lock();

  bool failed = false;
  std::string failure;
  HttpResponse response = send_once(request, failed, failure);
  if (failed && read) response = send_once(request, failed, failure);
  record.finished_at = now_utc();

  if (failed) {
    record.outcome = RequestOutcome::transport_error;
    ledger_->append(record);
    throw Error(ErrorKind::transport_error,
                request.method + " " + record.url + ": " + failure);
  }

  record.outcome = RequestOutcome::sent;
  record.status = response.status;
  record.response_digest = sha256_hex(response.body);
  ledger_->append(record);

  if (response.status >= 400) {
    std::string snippet = response.body.substr(0, kSnippetLength);
    throw Error(error_kind_for_status(response.status),
                request.method + " " + record.url + " -> HTTP " +
                    std::to_string(response.status) +
                    (snippet.empty() ? "" : ": " + snippet),
                response.status);
  }

  ResponseObserver observer;
  {
    std::lock_guard lock(observer_mutex_);
    observer = observer_;
  }
  if (observer) observer(request, response);
  return response;
}

}  // namespace ncf
