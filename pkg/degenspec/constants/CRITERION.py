# probability-measure criteria, numbered as in the validation report
BOUNDARY = 1
POSITIVITY = 2
MONOTONICITY = 3
SINGULAR_CONTINUITY = 4
NONDEGENERACY = 5

NAMES = {
    BOUNDARY: "boundary",
    POSITIVITY: "positivity",
    MONOTONICITY: "monotonicity",
    SINGULAR_CONTINUITY: "singular continuity",
    NONDEGENERACY: "nondegeneracy",
}
