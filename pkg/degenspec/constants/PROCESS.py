# Gaussian process catalog, see README "Kernels"
WIENER = "wiener"
BROWNIAN_BRIDGE = "brownian_bridge"
CENTERED_WIENER = "centered_wiener"
CENTERED_BRIDGE = "centered_bridge"
ELONGATED_BRIDGE = "elongated_bridge"
SLEPIAN = "slepian"
OU_STATIONARY = "ou_stationary"
OU_ZERO = "ou_zero"
BOGOLYUBOV = "bogolyubov"
BRIDGED_INTEGRATED_WIENER = "bridged_integrated_wiener"
MATERN = "matern"
CENTERED_INTEGRATED_WIENER = "centered_integrated_wiener"
CENTERED_INTEGRATED_BRIDGE = "centered_integrated_bridge"

ALL = (
    WIENER,
    BROWNIAN_BRIDGE,
    CENTERED_WIENER,
    CENTERED_BRIDGE,
    ELONGATED_BRIDGE,
    SLEPIAN,
    OU_STATIONARY,
    OU_ZERO,
    BOGOLYUBOV,
    BRIDGED_INTEGRATED_WIENER,
    MATERN,
    CENTERED_INTEGRATED_WIENER,
    CENTERED_INTEGRATED_BRIDGE,
)

# processes carrying a real parameter
PARAMETRIZED = (ELONGATED_BRIDGE, SLEPIAN, OU_STATIONARY, OU_ZERO, BOGOLYUBOV)

# integrations are part of the definition, endpoints are always 0
SELF_INTEGRATED = (
    BRIDGED_INTEGRATED_WIENER,
    MATERN,
    CENTERED_INTEGRATED_WIENER,
    CENTERED_INTEGRATED_BRIDGE,
)
