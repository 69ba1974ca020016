#include "keff/operators.hpp"

#include "keff/diffusion.hpp"
#include "keff/transport.hpp"

namespace keff {

std::unique_ptr<PhaseOperators> make_operators(const ProblemModel& model) {
  if (model.kind == ModelKind::Transport)
    return std::make_unique<TransportOperator>(model);
  return std::make_unique<DiffusionOperator>(model);
}

}  // namespace keff
