"""LP-file export: golden file, and a round-trip through an independent parser."""

import re

import numpy as np
import pytest

from harvestplan.milp import (
    ReferenceConfig,
    build_scalarized_milp,
    build_single_objective_milp,
    export_lp_file,
)
from harvestplan.scenarios import named_scenarios

from conftest import make_instance


def parse_lp(text: str):
    """Minimal standalone LP reader: sections, senses, coefficients, bounds.

    Written directly against the format description, independent of the
    writer's internals.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("\\")]
    section = None
    objective: dict[str, float] = {}
    constraints: dict[str, tuple[dict[str, float], str, float]] = {}
    bounds: dict[str, tuple[float | None, float | None]] = {}
    binaries: list[str] = []
    buffer = ""

    def flush_expr(expr: str):
        name = None
        if ":" in expr:
            name, expr = expr.split(":", 1)
            name = name.strip()
        sense = None
        rhs = None
        m = re.search(r"(<=|>=|=)\s*([-+0-9.eE]+)\s*$", expr)
        if m:
            sense, rhs = m.group(1), float(m.group(2))
            expr = expr[: m.start()]
        terms: dict[str, float] = {}
        for sign, num, var in re.findall(
            r"([+-]?)\s*([0-9.eE+-]*?)\s*([A-Za-z_][A-Za-z0-9_]*)", expr
        ):
            coef = float(num) if num not in ("", "+", "-") else 1.0
            if sign == "-":
                coef = -coef
            terms[var] = terms.get(var, 0.0) + coef
        return name, terms, sense, rhs

    def close_buffer():
        nonlocal buffer
        if not buffer.strip():
            buffer = ""
            return
        name, terms, sense, rhs = flush_expr(buffer)
        if section == "objective":
            objective.update(terms)
        elif section == "constraints":
            constraints[name] = (terms, sense, rhs)
        buffer = ""

    for raw in lines:
        stripped = raw.strip()
        low = stripped.lower()
        if low in {"minimize", "maximize"}:
            close_buffer()
            section = "objective"
            continue
        if low == "subject to":
            close_buffer()
            section = "constraints"
            continue
        if low == "bounds":
            close_buffer()
            section = "bounds"
            continue
        if low in {"binaries", "binary"}:
            close_buffer()
            section = "binaries"
            continue
        if low == "end":
            close_buffer()
            break
        if section in {"objective", "constraints"}:
            if ":" in stripped and buffer.strip():
                close_buffer()
            buffer += " " + stripped
        elif section == "bounds":
            m3 = re.match(
                r"([-+0-9.eE]+)\s*<=\s*(\w+)\s*<=\s*([-+0-9.eE]+)", stripped
            )
            m2 = re.match(r"(\w+)\s*(>=|<=|=)\s*([-+0-9.eE]+)", stripped)
            if m3:
                bounds[m3.group(2)] = (float(m3.group(1)), float(m3.group(3)))
            elif m2:
                v = float(m2.group(3))
                if m2.group(2) == ">=":
                    bounds[m2.group(1)] = (v, None)
                elif m2.group(2) == "<=":
                    bounds[m2.group(1)] = (None, v)
                else:
                    bounds[m2.group(1)] = (v, v)
        elif section == "binaries":
            binaries.extend(stripped.split())
    close_buffer()
    return objective, constraints, bounds, binaries


GOLDEN_SINGLE_BINARY = """\\ harvest scheduling model
Minimize
 obj: 1 dev_a1_t1_p1
Subject To
 above_a1_t1: 42 x_1_1 - 1 dev_a1_t1_p1 <= 25
 below_a1_t1: - 42 x_1_1 - 1 dev_a1_t1_p1 <= -25
Bounds
Binaries
 x_1_1
End
"""


class TestExport:
    def test_single_binary_golden_file(self):
        inst = make_instance(np.array([[42.0]]), demand=np.array([[25.0]]))
        model = build_single_objective_milp(inst, named_scenarios(inst)[1], 1, 1)
        assert export_lp_file(model) == GOLDEN_SINGLE_BINARY

    def test_case_study_shape_has_3000_binaries(self):
        rng = np.random.default_rng(1)
        means = rng.uniform(10, 400, size=(3, 250))
        inst = make_instance(
            means, 0.1 * means, np.tile(means.sum(axis=1)[:, None] / 24, (1, 12))
        )
        model = build_scalarized_milp(
            inst, list(named_scenarios(inst)), ReferenceConfig.neutral(inst, 3)
        )
        text = export_lp_file(model)
        _, _, _, binaries = parse_lp(text)
        assert len(binaries) == 3000

    @pytest.mark.parametrize("seed", range(6))
    def test_round_trip_coefficients(self, seed):
        rng = np.random.default_rng(seed)
        inst = make_instance(
            rng.uniform(0, 300, (2, 4)),
            rng.uniform(0, 60, (2, 4)),
            demand=rng.uniform(0, 400, (2, 2)),
        )
        scenarios = list(named_scenarios(inst))[: int(rng.integers(1, 4))]
        s = len(scenarios)
        ref = ReferenceConfig(
            rng.uniform(0, 2, (2, 2, s)),  # nonzero aspirations: constant term
            rng.uniform(0.5, 100, (2, 2, s)),
            epsilon=1e-4,
        )
        model = build_scalarized_milp(inst, scenarios, ref)
        objective, constraints, bounds, binaries = parse_lp(export_lp_file(model))

        assert len(binaries) == model.n_binary
        name_to_col = {n: i for i, n in enumerate(model.var_names)}
        # Objective coefficients reproduce to 12 significant digits.
        for var, coef in objective.items():
            assert coef == pytest.approx(
                model.objective[name_to_col[var]], rel=1e-12
            )
        nonzero_obj = {model.var_names[i] for i in np.nonzero(model.objective)[0]}
        assert nonzero_obj == set(objective)

        assert len(constraints) == model.n_rows
        for r, row_name in enumerate(model.row_names):
            terms, sense, rhs = constraints[row_name]
            assert sense == model.sense_text(r)
            assert rhs == pytest.approx(model.rhs[r], rel=1e-12, abs=1e-300)
            row = model.rows[r]
            expected = {
                model.var_names[i]: row[i] for i in np.nonzero(row)[0]
            }
            assert set(terms) == set(expected)
            for var, coef in terms.items():
                assert coef == pytest.approx(expected[var], rel=1e-12)

    def test_constant_term_documented(self):
        inst = make_instance(np.array([[10.0]]), demand=np.array([[5.0]]))
        ref = ReferenceConfig(
            np.full((1, 1, 1), 2.0), np.full((1, 1, 1), 3.0), epsilon=0.1
        )
        model = build_scalarized_milp(inst, [named_scenarios(inst)[1]], ref)
        assert model.objective_constant == pytest.approx(-0.1 * 3.0 * 2.0)
        text = export_lp_file(model)
        assert "objective constant" in text
        assert "-0.6" in text
