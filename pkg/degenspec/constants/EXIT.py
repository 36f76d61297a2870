OK = 0
DOMAIN_FAILURE = 1
IO_FAILURE = 2
