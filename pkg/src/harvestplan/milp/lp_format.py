"""Writer for the classic LP text format (objective / subject-to / bounds /
binaries sections), so models can be handed to any external solver.

Coefficients are printed with 15 significant digits; a conforming reader
reproduces them to at least 12.  A constant objective term, which the LP
format cannot attach to the minimize line portably, is emitted as a comment
and must be added to reported objective values by the caller.
"""

from __future__ import annotations

from .build import EQ, GE, MilpModel

_WRAP = 240


def format_number(x: float) -> str:
    return f"{x:.15g}"


def _terms(names: list[str], cols, coeffs) -> list[str]:
    parts = []
    for col, coef in zip(cols, coeffs):
        if coef == 0.0:
            continue
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {format_number(abs(coef))} {names[col]}")
    if not parts:
        return ["0 " + names[0]] if names else ["0"]
    # Drop the leading plus sign.
    if parts[0].startswith("+ "):
        parts[0] = parts[0][2:]
    return parts


def _wrap(prefix: str, parts: list[str]) -> list[str]:
    lines = []
    line = prefix
    for part in parts:
        if len(line) + len(part) + 1 > _WRAP:
            lines.append(line)
            line = " " + part
        else:
            line = f"{line} {part}"
    lines.append(line)
    return lines


def export_lp_file(model: MilpModel) -> str:
    """Render the model as LP-format text."""
    out: list[str] = []
    out.append("\\ harvest scheduling model")
    if model.objective_constant != 0.0:
        out.append(
            "\\ objective constant (add to reported objective): "
            + format_number(model.objective_constant)
        )
    out.append("Minimize")
    cols = [i for i in range(model.n_vars)]
    out.extend(_wrap(" obj:", _terms(model.var_names, cols, model.objective)))
    out.append("Subject To")
    for r in range(model.n_rows):
        row = model.rows[r]
        nz = [i for i in range(model.n_vars) if row[i] != 0.0]
        sense = {EQ: "=", GE: ">="}.get(int(model.senses[r]), "<=")
        parts = _terms(model.var_names, nz, row[nz])
        parts.append(f"{sense} {format_number(model.rhs[r])}")
        out.extend(_wrap(f" {model.row_names[r]}:", parts))
    out.append("Bounds")
    for i in range(model.n_vars):
        lo, hi = model.lower[i], model.upper[i]
        name = model.var_names[i]
        if model.is_integer[i] and lo == 0.0 and hi == 1.0:
            continue  # implied by the binaries section
        if hi == float("inf"):
            if lo == 0.0:
                continue  # LP-format default
            out.append(f" {name} >= {format_number(lo)}")
        elif lo == hi:
            out.append(f" {name} = {format_number(lo)}")
        else:
            out.append(f" {format_number(lo)} <= {name} <= {format_number(hi)}")
    binaries = [model.var_names[i] for i in range(model.n_vars) if model.is_integer[i]]
    if binaries:
        out.append("Binaries")
        out.extend(_wrap("", binaries))
    out.append("End")
    return "\n".join(out) + "\n"
