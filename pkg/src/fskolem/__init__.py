"""Skolem function synthesis for factored propositional formulas.

``exists X. f1(X1,Y1) & ... & fr(Xr,Yr)``: compute functions psi_i(Y) such
that substituting them for X eliminates the quantifier.
"""

__version__ = "0.1.0"

from .aig import FALSE, TRUE, AigError, AigManager, truth_table
from .frontend import (
    Cnf,
    FactoredSpec,
    ParseError,
    load_spec,
    order_variables,
    parse_factored,
    parse_qdimacs,
    tseitin_cnf,
)
from .sat_oracle import OracleError, SatOracle, SatResult
from .skolem import (
    Budget,
    BudgetExceeded,
    CbState,
    RunStats,
    SkolemVector,
    build_error_formula,
    cegar_skolem,
    generalize,
    init_abs_ref,
    mono_skolem,
    reverse_substitute,
    update_abs_ref,
)
from .verify import certify_exhaustive, certify_sat, check_prop1, exact_cb
