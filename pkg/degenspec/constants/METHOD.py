MC = "mc"
SADDLEPOINT = "saddlepoint"
ASYMPTOTIC = "asymptotic"

ALL = (MC, SADDLEPOINT, ASYMPTOTIC)
