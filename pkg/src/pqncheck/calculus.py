"""Differential-graded operators on forms.

Implements the Cartan differential, the differential d_N attached to a (1,1)
tensor (computed through the commutator of i_N with d), the Nijenhuis
torsion, the deformed Lie bracket of vector fields, the Koszul bracket of a
Poisson bivector on forms of every degree, and the Poisson bracket on
functions.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ChartMismatchError, DegreeError
from .exterior import (
    Bivector,
    Form,
    Tensor11,
    VectorField,
    lie_bracket,
    tensor_interior,
    wedge,
)
from .scalar import Chart, ScalarField


def differential(field: ScalarField) -> Form:
    """The 1-form df."""
    chart = field.chart
    return Form(chart, 1, {(i,): field.partial(i) for i in range(chart.dim)})


def cartan_d(form: Form) -> Form:
    """Exterior derivative: d(f dx_I) = sum_i (d_i f) dx_i ^ dx_I.  Satisfies d o d = 0."""
    chart = form.chart
    out: dict[tuple[int, ...], ScalarField] = {}
    for key, coeff in form.terms():
        for i in range(chart.dim):
            if i in key:
                continue
            dcoeff = coeff.partial(i)
            if dcoeff.is_zero_tree:
                continue
            new_key = (i,) + key
            out[new_key] = out[new_key] + dcoeff if new_key in out else dcoeff
    return Form(chart, form.degree + 1, out)


def nijenhuis_d(tensor: Tensor11, form: Form) -> Form:
    """The degree-one differential attached to a (1,1) tensor.

    Computed as i_N o d - d o i_N, which agrees with the intrinsic definition
    and reduces to the transpose action on functions: on a 0-form f it gives
    the 1-form df o N.  It anticommutes with d, and squares to zero exactly
    when the torsion of the tensor vanishes.
    """
    if tensor.chart != form.chart:
        raise ChartMismatchError("differential across charts")
    return tensor_interior(tensor, cartan_d(form)) - cartan_d(tensor_interior(tensor, form))


def deformed_lie_bracket(tensor: Tensor11, x: VectorField, y: VectorField) -> VectorField:
    """The bracket [X,Y]_N = [NX,Y] + [X,NY] - N[X,Y]."""
    nx = tensor.apply(x)
    ny = tensor.apply(y)
    return lie_bracket(nx, y) + lie_bracket(x, ny) - tensor.apply(lie_bracket(x, y))


class Torsion12:
    """The Nijenhuis torsion of a (1,1) tensor as a (1,2) tensor field.

    Components are precomputed on coordinate fields and extended tensorially:
    T(X, Y) = sum_{j<k} (X^j Y^k - X^k Y^j) T(e_j, e_k).
    """

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: dict[tuple[int, int], VectorField]):
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "components", components)

    def __setattr__(self, name, value):
        raise AttributeError("Torsion12 is immutable")

    def component(self, i: int, j: int, k: int) -> ScalarField:
        """The scalar component T^i_{jk} (antisymmetric in j, k)."""
        if j == k:
            return self.chart.zero()
        if j < k:
            return self.components[(j, k)].components[i]
        return -self.components[(k, j)].components[i]

    def coordinate_pairs(self):
        return self.components.items()

    def __call__(self, x: VectorField, y: VectorField) -> VectorField:
        if x.chart != self.chart or y.chart != self.chart:
            raise ChartMismatchError("torsion evaluated across charts")
        out = VectorField.zero(self.chart)
        for (j, k), base in self.components.items():
            weight = x.components[j] * y.components[k] - x.components[k] * y.components[j]
            if not weight.is_zero_tree:
                out = out + base * weight
        return out


def nijenhuis_torsion(tensor: Tensor11) -> Torsion12:
    """Torsion T(X,Y) = [NX,NY] - N([NX,Y] + [X,NY] - N[X,Y]), on coordinate pairs."""
    chart = tensor.chart
    columns = [tensor.column(j) for j in range(chart.dim)]
    components: dict[tuple[int, int], VectorField] = {}
    for j in range(chart.dim):
        ej = VectorField.basis(chart, j)
        for k in range(j + 1, chart.dim):
            ek = VectorField.basis(chart, k)
            value = lie_bracket(columns[j], columns[k]) - tensor.apply(
                lie_bracket(columns[j], ek) + lie_bracket(ej, columns[k])
            )
            components[(j, k)] = value
    return Torsion12(chart, components)


def poisson_bracket(pi: Bivector, f: ScalarField, g: ScalarField) -> ScalarField:
    """{f, g} = pi(df, dg) = sum_{ij} pi^{ij} (d_i f)(d_j g)."""
    if pi.chart != f.chart or pi.chart != g.chart:
        raise ChartMismatchError("bracket across charts")
    out = pi.chart.zero()
    for i, j, entry in pi.nonzero_entries():
        fi = f.partial(i)
        if fi.is_zero_tree:
            continue
        gj = g.partial(j)
        if gj.is_zero_tree:
            continue
        out = out + entry * fi * gj
    return out


# ---------------------------------------------------------------------------
# Koszul bracket
#
# The bracket of 1-forms
#
#     [a, b] = L_{pi# a} b - L_{pi# b} a - d<b, pi# a>
#
# extends uniquely to all form degrees subject to graded antisymmetry, the
# pairing rule against functions, and the graded Leibniz rule for the wedge
# product.  The extension is computed here by monomial peeling: decompose both
# arguments into wedge lists of functions and coordinate differentials, peel
# the right argument with the Leibniz rule, flip by graded antisymmetry
# whenever the left argument is not a single factor, and close on three bases:
# [f, g] = 0, [dx_i, g] = sum_j pi^{ij} d_j g, and [dx_i, dx_j] = d(pi^{ij}).
# ---------------------------------------------------------------------------


class _Atom:
    """A wedge factor: either a function (degree 0) or a coordinate differential."""

    __slots__ = ("degree", "field", "index")

    def __init__(self, degree: int, field: ScalarField | None, index: int | None):
        self.degree = degree
        self.field = field
        self.index = index


def _atoms_of_monomial(chart: Chart, key: tuple[int, ...], coeff: ScalarField) -> list[_Atom]:
    atoms = []
    if coeff.constant_value != Fraction(1):
        atoms.append(_Atom(0, coeff, None))
    atoms.extend(_Atom(1, None, i) for i in key)
    if not atoms:
        atoms.append(_Atom(0, chart.one(), None))
    return atoms


def _atom_form(chart: Chart, atom: _Atom) -> Form:
    if atom.degree == 0:
        return Form.from_scalar(atom.field)
    return Form(chart, 1, {(atom.index,): 1})


def _atoms_form(chart: Chart, atoms: list[_Atom]) -> Form:
    out = Form(chart, 0, {(): 1})
    for atom in atoms:
        out = wedge(out, _atom_form(chart, atom))
    return out


def _atoms_degree(atoms: list[_Atom]) -> int:
    return sum(a.degree for a in atoms)


def _coerce_degree(form: Form, degree: int) -> Form:
    # The degenerate bracket of two 0-forms is the zero 0-form standing in
    # for a degree -1 object; re-grade zero forms so sums line up.
    if form.degree != degree:
        if not form.is_zero:
            raise DegreeError(f"internal: expected degree {degree}, got {form.degree}")
        return Form.zero(form.chart, degree)
    return form


def _kb_atoms(pi: Bivector, left: list[_Atom], right: list[_Atom]) -> Form:
    chart = pi.chart
    if len(right) > 1:
        # Leibniz rule: peel the first factor of the right argument.
        head, tail = right[0], right[1:]
        q = _atoms_degree(left)
        target = max(q + _atoms_degree(right) - 1, 0)
        first = wedge(_kb_atoms(pi, left, [head]), _atoms_form(chart, tail))
        second = wedge(_atom_form(chart, head), _kb_atoms(pi, left, tail))
        if (q - 1) * head.degree % 2 == 1:
            second = -second
        return _coerce_degree(first, target) + _coerce_degree(second, target)
    if len(left) > 1:
        # graded antisymmetry: flip so the multi-factor side gets peeled.
        q = _atoms_degree(left)
        qp = _atoms_degree(right)
        flipped = _kb_atoms(pi, right, left)
        if (q - 1) * (qp - 1) % 2 == 0:
            flipped = -flipped
        return flipped
    a, b = left[0], right[0]
    if a.degree == 0 and b.degree == 0:
        return Form.zero(chart, 0)
    if a.degree == 1 and b.degree == 0:
        # pairing rule: [dx_i, g] = <dg, pi# dx_i> = sum_j pi^{ij} d_j g
        out = chart.zero()
        for j in range(chart.dim):
            entry = pi.entries[a.index][j]
            if not entry.is_zero_tree:
                out = out + entry * b.field.partial(j)
        return Form.from_scalar(out)
    if a.degree == 0 and b.degree == 1:
        return -_kb_atoms(pi, right, left)
    # [dx_i, dx_j] = d(pi^{ij})
    entry = pi.entries[a.index][b.index]
    return Form(chart, 1, {(j,): entry.partial(j) for j in range(chart.dim)})


def koszul_bracket(pi: Bivector, a: Form, b: Form) -> Form:
    """Koszul bracket of two forms; the result has degree deg a + deg b - 1.

    For two 0-forms the degree would be negative and the zero 0-form is
    returned.  The result is independent of how the arguments decompose into
    monomials (graded bilinearity over the reals).
    """
    if pi.chart != a.chart or pi.chart != b.chart:
        raise ChartMismatchError("bracket across charts")
    chart = pi.chart
    degree = max(a.degree + b.degree - 1, 0)
    out = Form.zero(chart, degree)
    if a.degree + b.degree - 1 < 0:
        return out
    if a.degree == 0 and a.is_zero:
        return out
    if b.degree == 0 and b.is_zero:
        return out
    a_monomials = list(a.terms()) if a.degree > 0 else [((), a.as_scalar())]
    b_monomials = list(b.terms()) if b.degree > 0 else [((), b.as_scalar())]
    for key_a, coeff_a in a_monomials:
        left = _atoms_of_monomial(chart, key_a, coeff_a)
        for key_b, coeff_b in b_monomials:
            right = _atoms_of_monomial(chart, key_b, coeff_b)
            out = out + _coerce_degree(_kb_atoms(pi, left, right), degree)
    return out
