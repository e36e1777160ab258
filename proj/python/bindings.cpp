#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wsi/bench.hpp"
#include "wsi/errors.hpp"
#include "wsi/history.hpp"
#include "wsi/txn.hpp"
#include "wsi/wal.hpp"
#include "wsi/workload.hpp"

namespace py = pybind11;
using namespace wsi;

namespace {

IsolationLevel level_of(const std::string& name) {
  if (auto l = parse_isolation_level(name)) return *l;
  throw py::value_error("unknown isolation level: " + name);
}

std::optional<std::uint64_t> commit_value(const CommitDecision& d) {
  if (d.is_aborted()) return std::nullopt;
  return d.commit_ts().value;
}

const char* decision_name(history::Decision d) {
  switch (d) {
    case history::Decision::kCommitted: return "committed";
    case history::Decision::kAborted: return "aborted";
    case history::Decision::kClientAbort: return "client-abort";
    case history::Decision::kUnfinished: return "unfinished";
  }
  return "?";
}

py::dict run_metrics(const workload::RunMetrics& m) {
  py::dict d;
  d["policy"] = to_string(m.level);
  d["distribution"] = workload::to_string(m.distribution);
  d["mix"] = workload::to_string(m.mix);
  d["clients"] = m.clients;
  d["committed"] = m.committed;
  d["aborted"] = m.aborted;
  d["read_only_committed"] = m.read_only_committed;
  d["read_only_aborted"] = m.read_only_aborted;
  d["pessimistic_aborts"] = m.pessimistic_aborts;
  d["abort_rate"] = m.abort_rate();
  d["throughput"] = m.throughput();
  d["wall_seconds"] = m.wall_seconds;
  d["valid"] = m.valid;
  d["error"] = m.error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_wsi, m) {
  m.doc() = "Write-snapshot isolation: oracle, engine, histories and workloads";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<CommitError>(m, "CommitError", base);
  py::register_exception<StateError>(m, "StateError", base);
  py::register_exception<PreconditionError>(m, "PreconditionError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<CapacityError>(m, "CapacityError", base);
  py::register_exception<RecoveryError>(m, "RecoveryError", base);
  py::register_exception<WalError>(m, "WalError", base);

  py::class_<Transaction>(m, "Transaction")
      .def("read", &Transaction::read, py::arg("row"),
           "Snapshot read; None if the row has no visible version.")
      .def("write", &Transaction::write, py::arg("row"), py::arg("value"))
      .def("commit", [](Transaction& t) { return commit_value(t.commit()); },
           "Commit timestamp, or None if the oracle aborted the transaction.")
      .def("abort", &Transaction::abort)
      .def_property_readonly("start_ts", [](const Transaction& t) { return t.start_ts().value; })
      .def_property_readonly("read_set", &Transaction::read_set)
      .def_property_readonly("write_set", &Transaction::write_set)
      .def_property_readonly("active", &Transaction::active)
      .def_property_readonly("read_only", &Transaction::read_only)
      .def("__enter__", [](Transaction& t) -> Transaction& { return t; }, py::return_value_policy::reference)
      .def("__exit__", [](Transaction& t, py::object, py::object, py::object) {
        if (t.active()) t.abort();
      });

  py::class_<Engine>(m, "Engine")
      .def(py::init([](const std::string& level, std::optional<std::size_t> capacity,
                       std::optional<std::filesystem::path> wal_path) {
             EngineOptions o;
             o.level = level_of(level);
             o.capacity = capacity;
             o.wal_path = std::move(wal_path);
             return std::make_unique<Engine>(o);
           }),
           py::arg("level") = "wsi", py::arg("capacity") = std::nullopt, py::arg("wal_path") = std::nullopt)
      .def("begin", &Engine::begin, py::keep_alive<0, 1>())
      .def_property_readonly("level", [](const Engine& e) { return to_string(e.level()); })
      .def_property_readonly("t_max", [](Engine& e) { return e.oracle().t_max().value; })
      .def("metrics", [](Engine& e) {
        const auto o = e.oracle().metrics();
        py::dict d;
        d["committed"] = o.committed;
        d["aborted"] = o.aborted;
        d["pessimistic_aborts"] = o.pessimistic_aborts;
        d["read_only_commits"] = o.read_only_commits;
        d["client_aborts"] = o.client_aborts;
        return d;
      });

  m.def("check", [](const std::string& text) { return history::check_report(history::parse(text)); },
        py::arg("history"), "One-line SI/WSI/serializability verdict for a history.");
  m.def("replay",
        [](const std::string& text, const std::string& level) {
          const auto r = history::replay_policy(history::parse(text), level_of(level));
          std::map<int, std::string> out;
          for (const auto& [id, d] : r.decisions) out[id] = decision_name(d);
          return out;
        },
        py::arg("history"), py::arg("level") = "wsi");
  m.def("is_serializable",
        [](const std::string& text) {
          const auto v = history::is_serializable(history::parse(text));
          return std::make_pair(v.serializable, v.witness);
        },
        py::arg("history"), "(serializable, witness order or None)");
  m.def("construct_serial",
        [](const std::string& text) { return history::format(history::construct_serial(history::parse(text))); },
        py::arg("history"));

  m.def("run_workload",
        [](std::uint64_t keys, const std::string& mix, const std::string& dist, std::uint32_t clients,
           std::uint64_t txns, std::uint64_t seed, const std::string& level,
           std::optional<std::size_t> capacity, std::optional<std::filesystem::path> wal_path) {
          workload::WorkloadSpec spec;
          spec.key_space = keys;
          auto mx = workload::parse_mix(mix);
          auto ds = workload::parse_distribution(dist);
          if (!mx) throw py::value_error("unknown mix: " + mix);
          if (!ds) throw py::value_error("unknown distribution: " + dist);
          spec.mix = *mx;
          spec.distribution = *ds;
          spec.client_count = clients;
          spec.txn_count = txns;
          spec.seed = seed;
          workload::RunOptions o;
          o.level = level_of(level);
          o.capacity = capacity;
          o.wal_path = std::move(wal_path);
          workload::RunMetrics metrics;
          {
            py::gil_scoped_release release;
            metrics = workload::run(spec, o);
          }
          return run_metrics(metrics);
        },
        py::arg("keys") = 100'000, py::arg("mix") = "mixed", py::arg("dist") = "uniform",
        py::arg("clients") = 1, py::arg("txns") = 10'000, py::arg("seed") = 1, py::arg("level") = "wsi",
        py::arg("capacity") = std::nullopt, py::arg("wal_path") = std::nullopt);

  m.def("bench_oracle",
        [](const std::string& level, std::uint32_t clients, std::uint64_t requests,
           std::optional<std::size_t> capacity, std::uint64_t seed) {
          bench::BenchSpec spec;
          spec.level = level_of(level);
          spec.clients = clients;
          spec.requests = requests;
          spec.capacity = capacity;
          spec.seed = seed;
          bench::BenchResult r;
          {
            py::gil_scoped_release release;
            r = bench::run_bench(spec);
          }
          py::dict d;
          d["policy"] = to_string(r.level);
          d["clients"] = r.clients;
          d["decisions"] = r.decisions;
          d["decisions_per_sec"] = r.decisions_per_sec();
          d["p50_us"] = r.latency.percentile_us(0.5);
          d["p99_us"] = r.latency.percentile_us(0.99);
          d["committed"] = r.committed;
          d["aborted"] = r.aborted;
          d["pessimistic_aborts"] = r.pessimistic_aborts;
          return d;
        },
        py::arg("level") = "wsi", py::arg("clients") = 1, py::arg("requests") = 100'000,
        py::arg("capacity") = std::nullopt, py::arg("seed") = 1);

  m.def("recover",
        [](const std::filesystem::path& path, std::optional<std::size_t> capacity) {
          const auto s = recover(path, capacity);
          py::dict d;
          std::map<std::string, std::uint64_t> rows;
          for (const auto& [row, t] : s.table.last_commits()) rows[row] = t.value;
          d["last_commit"] = rows;
          d["t_max"] = s.table.t_max().value;
          d["committed"] = s.table.commit_records().size();
          d["aborted"] = s.table.aborted().size();
          d["reserved_upto"] = s.reserved_upto.value;
          return d;
        },
        py::arg("path"), py::arg("capacity") = std::nullopt);
}
