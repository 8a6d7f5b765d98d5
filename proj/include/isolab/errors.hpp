// Exception hierarchy shared by all modules.  Every failure mode that is part
// of a function's contract gets its own type so callers (and tests) can match
// on exactly the condition they care about.
#pragma once

#include <stdexcept>
#include <string>

namespace isolab {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define ISOLAB_DEFINE_ERROR(NAME)                                  \
  struct NAME : Error {                                            \
    explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
  }

// core-algebra
ISOLAB_DEFINE_ERROR(SingularMatrix);
ISOLAB_DEFINE_ERROR(DegenerateSpectrum);

// special-functions
ISOLAB_DEFINE_ERROR(PoleOfGamma);
ISOLAB_DEFINE_ERROR(ParameterPole);
ISOLAB_DEFINE_ERROR(NearSingularArgument);
ISOLAB_DEFINE_ERROR(NonGenericParameters);
ISOLAB_DEFINE_ERROR(OutOfSector);
ISOLAB_DEFINE_ERROR(SmallParameterRegime);

// fuchsian-monodromy
ISOLAB_DEFINE_ERROR(StepUnderflow);
ISOLAB_DEFINE_ERROR(PoleProximity);
ISOLAB_DEFINE_ERROR(ResonantExponent);
ISOLAB_DEFINE_ERROR(CyclicViolation);

// painleve6
ISOLAB_DEFINE_ERROR(ConstraintViolation);
ISOLAB_DEFINE_ERROR(SingularTime);
ISOLAB_DEFINE_ERROR(IndeterminateY);
ISOLAB_DEFINE_ERROR(GridTooCoarse);
ISOLAB_DEFINE_ERROR(ReflectionSingular);

// painleve5
ISOLAB_DEFINE_ERROR(SectorViolation);
ISOLAB_DEFINE_ERROR(AnchorTooClose);
ISOLAB_DEFINE_ERROR(NonUnipotentResidual);
ISOLAB_DEFINE_ERROR(IndeterminateTau);

// schlesinger-ladder
ISOLAB_DEFINE_ERROR(DeltaZero);
ISOLAB_DEFINE_ERROR(ExistenceViolation);

struct LadderBlocked : Error {
  int level;
  LadderBlocked(int level_, const std::string& msg)
      : Error("LadderBlocked at level " + std::to_string(level_) + ": " + msg),
        level(level_) {}
};

// triangularizer
ISOLAB_DEFINE_ERROR(AmbiguousClassification);
ISOLAB_DEFINE_ERROR(UnsolvablePair);
ISOLAB_DEFINE_ERROR(BasisDegenerate);

// limit-lab
ISOLAB_DEFINE_ERROR(DenominatorCollapse);
ISOLAB_DEFINE_ERROR(ThetaZero);
ISOLAB_DEFINE_ERROR(ConditionViolation);
ISOLAB_DEFINE_ERROR(NoConvergence);
ISOLAB_DEFINE_ERROR(MismatchBeyondTolerance);

// cli-harness
ISOLAB_DEFINE_ERROR(ConfigError);

#undef ISOLAB_DEFINE_ERROR

}  // namespace isolab
