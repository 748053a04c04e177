#pragma once
// HTTP+JSON front of the experiment service.
//
//   POST /api/sessions                       {"treatment"?: "closed"|"open"}
//   GET  /api/sessions/{id}                  current state
//   POST /api/sessions/{id}/instructions/ack
//   POST /api/sessions/{id}/quiz             {"answers": {question id: number}}
//   POST /api/sessions/{id}/decision         {"fly": bool}          (closed)
//   POST /api/sessions/{id}/plan             {"plan": [10 ints]}    (open)
//   POST /api/sessions/{id}/questionnaire    {age, gender, difficulty, strategy}
//   POST /api/sessions/{id}/mpl              {"choices": [20 x "A"|"B"]}
//   GET  /api/sessions/{id}/result
//
// Errors: {"error": {"code": ..., "message": ...}} with code one of
// not_found (404), validation (400), out_of_phase, wrong_treatment,
// crashed (409), internal (500).

#include <memory>
#include <string>

#include "uavstop/service.hpp"

namespace uavstop {

class HttpApi {
 public:
  explicit HttpApi(ExperimentService& service);
  ~HttpApi();
  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace uavstop
