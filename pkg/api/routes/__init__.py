# Subcommand modules; each exposes register(subparsers) and a handler
from api.routes import check_golden, counter_analytic, evolve, scan, single

ROUTES = (single, counter_analytic, evolve, scan, check_golden)
