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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ncf/canonical.hpp"
#include "ncf/error.hpp"
#include "ncf/timeutil.hpp"

namespace ncf {

/// Account credentials: the username plus an app password issued to a client.
struct Credentials {
  std::string base_url;
  std::string username;
  std::string app_password;

  /// Throws Error(invalid_credentials) when an invariant does not hold.
  void validate() const;
  /// "<username>@<host>[:<port>]"
  std::string account_id() const;
  /// sha256(username + base_url); never covers the secret.
  std::string fingerprint() const;
};

struct BaseUrl {
  std::string scheme;  // "http" | "https"
  std::string host;
  int port = 0;
  bool explicit_port = false;
  std::string path;  // no trailing slash, "" for the server root

  std::string origin() const;  // scheme://host[:port]
};

BaseUrl parse_base_url(std::string_view url);

/// "Basic " + base64(username ":" app_password).
std::string build_auth_header(const Credentials& credentials);

struct MethodPolicy {
  std::set<std::string> allowed_methods;
  std::string context_label;

  bool allows(std::string_view method) const;

  /// Exactly {GET, HEAD, PROPFIND}.
  static MethodPolicy acquisition();
  /// Reads plus DELETE, for session revocation only.
  static MethodPolicy session_control();
};

enum class RequestOutcome { sent, blocked, transport_error };

std::string_view to_string(RequestOutcome outcome) noexcept;

struct RequestRecord {
  std::int64_t sequence = 0;
  std::string method;
  std::string url;
  std::string context;
  RequestOutcome outcome = RequestOutcome::sent;
  int status = 0;  // 0 unless outcome == sent
  Instant started_at{};
  Instant finished_at{};
  std::string response_digest;  // empty unless outcome == sent
};

Json to_json(const RequestRecord& record);
RequestRecord request_record_from_json(const Json& j);

/// Append-only, totally ordered log of every request the transport handled.
class RequestLedger {
 public:
  /// Assigns the next sequence number and appends; returns the stored copy.
  RequestRecord append(RequestRecord record);
  std::vector<RequestRecord> records() const;
  std::size_t size() const;
  /// Canonical line-delimited serialization of all records.
  std::string serialize() const;

 private:
  mutable std::mutex mutex_;
  std::vector<RequestRecord> records_;
};

struct HttpRequest {
  std::string method;
  /// Absolute server path, optionally with "?query"; must lie under the
  /// base URL path.
  std::string target;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;

  std::string header(std::string_view name) const;
};

struct TransportOptions {
  std::chrono::seconds timeout{30};
  std::string user_agent = "ncforensic/1.0";
  std::shared_ptr<RequestLedger> ledger;
};

/// Authenticated HTTP transport. Every `execute` call appends exactly one
/// record to the ledger, including requests that were blocked or failed.
class Transport {
 public:
  using ResponseObserver =
      std::function<void(const HttpRequest&, const HttpResponse&)>;

  explicit Transport(Credentials credentials, TransportOptions options = {});
  ~Transport();
  Transport(const Transport&) = delete;
  Transport& operator=(const Transport&) = delete;

  /// Throws Error(policy_violation) without sending when the method is not
  /// allowed, Error(transport_error) on connection failure, and an
  /// HTTP-status-derived Error for status >= 400.
  HttpResponse execute(const HttpRequest& request, const MethodPolicy& policy);

  const Credentials& credentials() const noexcept { return credentials_; }
  const BaseUrl& base() const noexcept { return base_; }
  /// Absolute server path for an endpoint relative to the base URL, e.g.
  /// "remote.php/dav/files/admin" -> "/nextcloud/remote.php/dav/files/admin".
  std::string endpoint(std::string_view relative) const;
  std::string absolute_url(std::string_view target) const;

  RequestLedger& ledger() noexcept { return *ledger_; }
  std::shared_ptr<RequestLedger> shared_ledger() const { return ledger_; }

  /// Called for every successful (status < 400) response; used to retain raw
  /// bodies for the evidence bundle.
  void set_response_observer(ResponseObserver observer);

 private:
  HttpResponse send_once(const HttpRequest& request, bool& transport_failed,
                         std::string& failure);

  Credentials credentials_;
  BaseUrl base_;
  TransportOptions options_;
  std::string auth_header_;
  std::shared_ptr<RequestLedger> ledger_;
  std::mutex mutating_mutex_;
  mutable std::mutex observer_mutex_;
  ResponseObserver observer_;
};

/// Maps an HTTP error status to the error kind surfaced to callers.
ErrorKind error_kind_for_status(int status) noexcept;

}  // namespace ncf
