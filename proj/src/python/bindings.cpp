#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tlc/automaton.hpp"
#include "tlc/compose.hpp"
#include "tlc/environment.hpp"
#include "tlc/io.hpp"
#include "tlc/learner.hpp"
#include "tlc/logic.hpp"

namespace py = pybind11;
using namespace tlc;

namespace {

std::string kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::True: return "true";
    case NodeKind::False: return "false";
    case NodeKind::Pred: return "pred";
    case NodeKind::Not: return "not";
    case NodeKind::And: return "and";
    case NodeKind::Or: return "or";
    case NodeKind::Eventually: return "eventually";
    case NodeKind::Next: return "next";
    case NodeKind::Until: return "until";
    case NodeKind::Then: return "then";
  }
  return "?";
}

}  // namespace

PYBIND11_MODULE(_tlcompose, m) {
  m.doc() = "Temporal-logic skill composition core";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<VerificationError>(m, "VerificationError",
                                            PyExc_RuntimeError);

  m.attr("RHO_MAX") = kRhoMax;

  py::class_<Predicate>(m, "Predicate")
      .def_readonly("coeffs", &Predicate::coeffs)
      .def_readonly("threshold", &Predicate::threshold)
      .def("robustness", &Predicate::robustness, py::arg("sample"))
      .def("text", &Predicate::text)
      .def("__repr__", [](const Predicate& p) {
        return "Predicate(" + p.text() + ")";
      });

  py::class_<FormulaNode, std::shared_ptr<FormulaNode>>(m, "Formula")
      .def_property_readonly(
          "kind", [](const FormulaNode& f) { return kind_name(f.kind); })
      .def_property_readonly(
          "kids", [](const FormulaNode& f) { return f.kids; })
      .def_property_readonly(
          "pred",
          [](const FormulaNode& f) -> std::optional<Predicate> {
            if (f.kind != NodeKind::Pred) return std::nullopt;
            return f.pred;
          })
      .def("__str__",
           [](const std::shared_ptr<const FormulaNode>& f) {
             return print_formula(f);
           })
      .def("__repr__", [](const std::shared_ptr<const FormulaNode>& f) {
        return "Formula(" + print_formula(f) + ")";
      });

  m.def(
      "parse_formula",
      [](const std::string& text, const std::set<std::string>& features,
         const std::map<std::string, std::string>& macros) {
        std::map<std::string, Formula> bound;
        for (const auto& [name, body] : macros)
          bound[name] = parse_formula(body, features);
        return parse_formula(text, features, bound);
      },
      py::arg("text"), py::arg("features") = std::set<std::string>{"x", "y"},
      py::arg("macros") = std::map<std::string, std::string>{});
  m.def("print_formula", &print_formula, py::arg("formula"));
  m.def(
      "canonicalize", [](const Formula& f) { return tlc::canonicalize(f); },
      py::arg("formula"));
  m.def("robustness", &robustness, py::arg("trace"), py::arg("formula"),
        py::arg("t") = 0);
  m.def("collect_alphabet", &collect_alphabet, py::arg("formula"));

  py::class_<Guard>(m, "Guard")
      .def_readonly("alphabet_size", &Guard::alphabet_size)
      .def_readonly("sats", &Guard::sats)
      .def("contains", &Guard::contains, py::arg("assignment"))
      .def("empty", &Guard::empty)
      .def("text", &Guard::text, py::arg("alphabet"));

  py::class_<Fsa>(m, "Fsa")
      .def_readonly("alphabet", &Fsa::alphabet)
      .def_readonly("labels", &Fsa::labels)
      .def_readonly("initial", &Fsa::initial)
      .def_readonly("accepting", &Fsa::accepting)
      .def_readonly("trap", &Fsa::trap)
      .def_property_readonly("num_states", &Fsa::num_states)
      .def("is_accepting", &Fsa::is_accepting, py::arg("q"))
      .def("is_trap", &Fsa::is_trap, py::arg("q"))
      .def("is_terminal", &Fsa::is_terminal, py::arg("q"))
      .def("assignment_of", &Fsa::assignment_of, py::arg("sample"))
      .def("step", &Fsa::step, py::arg("q"), py::arg("sample"))
      .def("step_assignment", &Fsa::step_assignment, py::arg("q"),
           py::arg("assignment"))
      .def("outgoing_disjunction", &Fsa::outgoing_disjunction, py::arg("q"))
      .def("fingerprint", &Fsa::fingerprint)
      .def("to_dot", [](const Fsa& f) { return to_dot(f); })
      .def("to_json", [](const Fsa& f) { return fsa_to_json(f); })
      .def_static("from_json", &fsa_from_json, py::arg("json_text"));

  py::class_<ProductFsa>(m, "ProductFsa")
      .def_readonly("fsa", &ProductFsa::fsa)
      .def_readonly("pairs", &ProductFsa::pairs)
      .def_readonly("left", &ProductFsa::left)
      .def_readonly("right", &ProductFsa::right)
      .def("project_left", &ProductFsa::project_left, py::arg("assignment"))
      .def("project_right", &ProductFsa::project_right, py::arg("assignment"));

  m.def("translate", &translate, py::arg("formula"));
  m.def("product", &product, py::arg("left"), py::arg("right"));
  m.def("accepts", &accepts, py::arg("fsa"), py::arg("trace"));

  py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>(), py::arg("seed"));

  py::class_<DiscreteMdp>(m, "DiscreteMdp")
      .def_property_readonly("num_states", &DiscreteMdp::num_states)
      .def_property_readonly("num_actions", &DiscreteMdp::num_actions)
      .def("sample_of", &DiscreteMdp::sample_of, py::arg("state"))
      .def("reset", &DiscreteMdp::reset, py::arg("rng"))
      .def("step", &DiscreteMdp::step, py::arg("state"), py::arg("action"),
           py::arg("rng"))
      .def("reset_support", &DiscreteMdp::reset_support);

  py::class_<GridWorld, DiscreteMdp>(m, "GridWorld")
      .def(py::init<int, int, double, std::optional<std::pair<int, int>>>(),
           py::arg("width") = 10, py::arg("height") = 8,
           py::arg("slip") = 0.2, py::arg("fixed_start") = std::nullopt)
      .def_property_readonly("width", &GridWorld::width)
      .def_property_readonly("height", &GridWorld::height)
      .def_property_readonly("slip", &GridWorld::slip)
      .def("index_of", &GridWorld::index_of, py::arg("x"), py::arg("y"))
      .def("coords_of", &GridWorld::coords_of, py::arg("state"))
      .def("transition_prob", &GridWorld::transition_prob, py::arg("state"),
           py::arg("action"), py::arg("next"));

  py::class_<FsaAugmentedMdp::Episode>(m, "Episode")
      .def_readwrite("s", &FsaAugmentedMdp::Episode::s)
      .def_readwrite("q", &FsaAugmentedMdp::Episode::q)
      .def_readwrite("t", &FsaAugmentedMdp::Episode::t)
      .def_readwrite("done", &FsaAugmentedMdp::Episode::done);

  py::class_<FsaAugmentedMdp::StepResult>(m, "StepResult")
      .def_readonly("reward", &FsaAugmentedMdp::StepResult::reward)
      .def_readonly("done", &FsaAugmentedMdp::StepResult::done);

  py::class_<FsaAugmentedMdp>(m, "FsaAugmentedMdp")
      .def(py::init<const DiscreteMdp&, Fsa, int>(), py::arg("mdp"),
           py::arg("fsa"), py::arg("horizon"),
           py::keep_alive<1, 2>())  // the wrapper aliases the inner MDP
      .def_property_readonly("horizon", &FsaAugmentedMdp::horizon)
      .def_property_readonly("num_q", &FsaAugmentedMdp::num_q)
      .def_property_readonly("fsa", &FsaAugmentedMdp::fsa)
      .def("reset", &FsaAugmentedMdp::reset, py::arg("rng"))
      .def("step", &FsaAugmentedMdp::step, py::arg("episode"),
           py::arg("action"), py::arg("rng"))
      .def("terminal_q", &FsaAugmentedMdp::terminal_q, py::arg("q"))
      .def("next_q", &FsaAugmentedMdp::next_q, py::arg("q"), py::arg("s"))
      .def("progress_reward", &FsaAugmentedMdp::progress_reward, py::arg("q"),
           py::arg("s"));

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("success_rate", &EvalReport::success_rate)
      .def_readonly("mean_steps_to_accept", &EvalReport::mean_steps_to_accept)
      .def_readonly("mean_return", &EvalReport::mean_return)
      .def_readonly("episodes", &EvalReport::episodes);

  m.def("evaluate_satisfaction", &evaluate_satisfaction, py::arg("env"),
        py::arg("policy"), py::arg("episodes"), py::arg("rng"));
  m.def("reachable_augmented_states", &reachable_augmented_states,
        py::arg("env"));

  py::class_<TransitionRecord>(m, "TransitionRecord")
      .def(py::init<>())
      .def_readwrite("s", &TransitionRecord::s)
      .def_readwrite("action", &TransitionRecord::action)
      .def_readwrite("s_next", &TransitionRecord::s_next)
      .def_readwrite("episode", &TransitionRecord::episode)
      .def_readwrite("t", &TransitionRecord::t);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &TrainConfig::gamma)
      .def_readwrite("alpha", &TrainConfig::alpha)
      .def_readwrite("horizon", &TrainConfig::horizon)
      .def_readwrite("update_steps", &TrainConfig::update_steps)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<QTable>(m, "QTable")
      .def(py::init<>())
      .def(py::init<int, int, int>(), py::arg("num_states"), py::arg("num_q"),
           py::arg("num_actions"))
      .def_readwrite("num_states", &QTable::num_states)
      .def_readwrite("num_q", &QTable::num_q)
      .def_readwrite("num_actions", &QTable::num_actions)
      .def_readwrite("data", &QTable::data)
      .def_readwrite("formula", &QTable::formula)
      .def_readwrite("fsa_fingerprint", &QTable::fsa_fingerprint)
      .def_readwrite("env_hash", &QTable::env_hash)
      .def("at",
           [](const QTable& qt, int s, int q, int a) { return qt.at(s, q, a); },
           py::arg("s"), py::arg("q"), py::arg("a"))
      .def("set",
           [](QTable& qt, int s, int q, int a, double v) { qt.at(s, q, a) = v; },
           py::arg("s"), py::arg("q"), py::arg("a"), py::arg("value"))
      .def("max_over_actions", &QTable::max_over_actions, py::arg("s"),
           py::arg("q"))
      .def("max_value", &QTable::max_value)
      .def("to_json", [](const QTable& qt) { return qtable_to_json(qt); })
      .def_static("from_json", &qtable_from_json, py::arg("text"));

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("table", &TrainResult::table)
      .def_readonly("buffer", &TrainResult::buffer);

  m.def("greedy_action", &greedy_action, py::arg("table"), py::arg("s"),
        py::arg("q"));
  m.def("extract_subpolicy", &extract_subpolicy, py::arg("table"),
        py::arg("q"));
  m.def("q_learning_train", &q_learning_train, py::arg("env"), py::arg("cfg"),
        py::arg("checkpoint") = nullptr, py::arg("checkpoint_every") = 0);
  m.def("value_iteration_oracle", &value_iteration_oracle, py::arg("env"),
        py::arg("gamma") = 0.95);
  m.def("normalize_q", &normalize_q, py::arg("table"));

  py::enum_<Stage>(m, "Stage")
      .value("C1", Stage::C1)
      .value("C2", Stage::C2)
      .value("C3", Stage::C3);
  m.def("stage_from_string", &stage_from_string, py::arg("text"));
  m.def("stage_to_string", &stage_to_string, py::arg("stage"));

  py::class_<CompositionJob>(m, "CompositionJob")
      .def(py::init<>())
      .def_readwrite("q1", &CompositionJob::q1)
      .def_readwrite("q2", &CompositionJob::q2)
      .def_readwrite("pf", &CompositionJob::pf)
      .def_readwrite("state_samples", &CompositionJob::state_samples)
      .def_readwrite("buffer", &CompositionJob::buffer)
      .def_readwrite("stage", &CompositionJob::stage)
      .def_readwrite("update_steps", &CompositionJob::update_steps)
      .def_readwrite("gamma", &CompositionJob::gamma)
      .def_readwrite("alpha", &CompositionJob::alpha)
      .def_readwrite("seed", &CompositionJob::seed);

  py::class_<RelabeledTransition>(m, "RelabeledTransition")
      .def_readonly("s", &RelabeledTransition::s)
      .def_readonly("action", &RelabeledTransition::action)
      .def_readonly("s_next", &RelabeledTransition::s_next)
      .def_readonly("pq", &RelabeledTransition::pq)
      .def_readonly("pq_next", &RelabeledTransition::pq_next)
      .def_readonly("r_and", &RelabeledTransition::r_and)
      .def_readonly("r_q", &RelabeledTransition::r_q);

  py::class_<CompositionResult>(m, "CompositionResult")
      .def_readonly("composed", &CompositionResult::composed)
      .def_readonly("correction", &CompositionResult::correction);

  py::class_<DecompositionReport>(m, "DecompositionReport")
      .def_readonly("mean_product", &DecompositionReport::mean_product)
      .def_readonly("mean_left", &DecompositionReport::mean_left)
      .def_readonly("mean_right", &DecompositionReport::mean_right)
      .def_readonly("mean_overlap", &DecompositionReport::mean_overlap)
      .def_readonly("residual", &DecompositionReport::residual)
      .def_readonly("residual_se", &DecompositionReport::residual_se)
      .def_readonly("episodes", &DecompositionReport::episodes)
      .def_readonly("identity_holds", &DecompositionReport::identity_holds);

  m.def("relabel", &relabel, py::arg("buffer"), py::arg("pf"),
        py::arg("samples"));
  m.def("compose_skills", &compose_skills, py::arg("job"));
  m.def("decomposition_check", &decomposition_check, py::arg("env"),
        py::arg("pf"), py::arg("policy"), py::arg("episodes"),
        py::arg("gamma"), py::arg("rng"));

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("width", &EnvConfig::width)
      .def_readwrite("height", &EnvConfig::height)
      .def_readwrite("slip", &EnvConfig::slip)
      .def_readwrite("horizon", &EnvConfig::horizon)
      .def_readwrite("fixed_start", &EnvConfig::fixed_start)
      .def("to_json", &EnvConfig::to_json)
      .def_static("from_json", &EnvConfig::from_json, py::arg("text"))
      .def("hash", &EnvConfig::hash)
      .def("make_grid", &EnvConfig::make_grid);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("env", &ExperimentConfig::env)
      .def_readwrite("macros", &ExperimentConfig::macros)
      .def_readwrite("formula_text", &ExperimentConfig::formula_text)
      .def_readwrite("train", &ExperimentConfig::train)
      .def_readwrite("eval_episodes", &ExperimentConfig::eval_episodes)
      .def_readwrite("checkpoint_every", &ExperimentConfig::checkpoint_every)
      .def_readwrite("checkpoint_episodes",
                     &ExperimentConfig::checkpoint_episodes)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_static("from_json", &ExperimentConfig::from_json, py::arg("text"))
      .def_static("from_file", &ExperimentConfig::from_file, py::arg("path"))
      .def("to_json", &ExperimentConfig::to_json)
      .def("hash", &ExperimentConfig::hash)
      .def("parse", &ExperimentConfig::parse);

  m.def("buffer_to_json", &buffer_to_json, py::arg("buffer"),
        py::arg("env_hash") = std::string{});
  m.def("buffer_from_json",
        [](const std::string& text) {
          std::string env_hash;
          ReplayBuffer buf = buffer_from_json(text, &env_hash);
          return py::make_tuple(buf, env_hash);
        },
        py::arg("text"));
}
