#pragma once

#include <stdexcept>
#include <string>

namespace ck {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CK_DEFINE_ERROR(Name)                                      \
  struct Name : Error {                                            \
    explicit Name(const std::string& what = #Name) : Error(what) {} \
  }

CK_DEFINE_ERROR(DegenerateTriple);
CK_DEFINE_ERROR(DegenerateConfiguration);
CK_DEFINE_ERROR(OverlappingArcs);
CK_DEFINE_ERROR(IsIdentity);
CK_DEFINE_ERROR(LogBranchFailure);
CK_DEFINE_ERROR(JetUnavailable);
CK_DEFINE_ERROR(GridTooCoarse);
CK_DEFINE_ERROR(NearDiagonal);
CK_DEFINE_ERROR(FiniteDifferenceUnreliable);
CK_DEFINE_ERROR(PoleCrossing);
CK_DEFINE_ERROR(StencilDegenerate);
CK_DEFINE_ERROR(HasFixedPoint);
CK_DEFINE_ERROR(NotInvariant);
CK_DEFINE_ERROR(PingPongFailure);
CK_DEFINE_ERROR(BudgetExceeded);
CK_DEFINE_ERROR(DepthExceeded);
CK_DEFINE_ERROR(BumpEscapesGap);
CK_DEFINE_ERROR(NotHyperbolicLike);
CK_DEFINE_ERROR(NotAttracting);
CK_DEFINE_ERROR(SlowConvergence);
CK_DEFINE_ERROR(SpectralFail);
CK_DEFINE_ERROR(StabilizerMissing);
CK_DEFINE_ERROR(MatchingFailure);
CK_DEFINE_ERROR(ClosingFailure);
CK_DEFINE_ERROR(MarginCollapse);
CK_DEFINE_ERROR(NotOnStableLeaf);
CK_DEFINE_ERROR(TailTooLarge);
CK_DEFINE_ERROR(ConfigError);
CK_DEFINE_ERROR(ExperimentError);
CK_DEFINE_ERROR(Overflow);

#undef CK_DEFINE_ERROR

}  // namespace ck
