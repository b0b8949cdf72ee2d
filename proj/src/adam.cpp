#include "topoae/diffnet/adam.hpp"

#include <cmath>

#include "topoae/errors.hpp"

namespace topoae::diffnet {

AdamState::AdamState(Eigen::Index num_params, AdamConfig cfg)
    : config(cfg),
      first_moment(Vector::Zero(num_params)),
      second_moment(Vector::Zero(num_params)) {}

void AdamState::update(Vector& weights, const Vector& gradient) {
  if (weights.size() != first_moment.size() || gradient.size() != first_moment.size()) {
    throw ArgumentError("adam_step: weight/gradient/moment shapes disagree");
  }
  if (!gradient.allFinite()) {
    throw NumericalError("adam_step: non-finite gradient at step " + std::to_string(step + 1));
  }
  ++step;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  first_moment = b1 * first_moment + (1.0 - b1) * gradient;
  second_moment = b2 * second_moment + (1.0 - b2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  weights.array() -= config.learning_rate * (first_moment.array() / c1) /
                     ((second_moment.array() / c2).sqrt() + config.epsilon);
}

std::pair<Vector, AdamState> adam_step(const AdamState& state, const Vector& weights,
                                       const Vector& gradient) {
  AdamState next = state;
  Vector w = weights;
  next.update(w, gradient);
  return {std::move(w), std::move(next)};
}

namespace {
std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }
}  // namespace

nlohmann::json AdamState::to_json() const {
  return {{"learning_rate", config.learning_rate},
          {"beta1", config.beta1},
          {"beta2", config.beta2},
          {"epsilon", config.epsilon},
          {"step", step},
          {"first_moment", to_vec(first_moment)},
          {"second_moment", to_vec(second_moment)}};
}

AdamState AdamState::from_json(const nlohmann::json& j) {
  AdamState s;
  s.config.learning_rate = j.at("learning_rate").get<double>();
  s.config.beta1 = j.at("beta1").get<double>();
  s.config.beta2 = j.at("beta2").get<double>();
  s.config.epsilon = j.at("epsilon").get<double>();
  s.step = j.at("step").get<std::int64_t>();
  const auto m = j.at("first_moment").get<std::vector<double>>();
  const auto v = j.at("second_moment").get<std::vector<double>>();
  if (m.size() != v.size()) throw FormatError("adam state: moment lengths differ");
  s.first_moment = Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(m.size()));
  s.second_moment = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  return s;
}

}  // namespace topoae::diffnet
