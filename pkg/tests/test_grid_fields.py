import numpy as np
import pytest

from edlab.errors import NonFiniteFieldError
from edlab.fields import (
    ComplexField,
    PhaseRecord,
    ScalarField,
    VectorField,
    field_to_csv,
    load_field,
    save_field,
)
from edlab.grid import Grid


def test_topologies_set_periodicity():
    assert Grid("line", (16,), (1.0,)).periodic == (False,)
    assert Grid("ring", (16,), (1.0,)).periodic == (True,)
    assert Grid("plane", (16, 16), (1.0, 2.0)).periodic == (False, False)
    assert Grid("torus", (16, 16), (1.0, 2.0)).periodic == (True, True)


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        Grid("ring", (4,), (1.0,))          # below minimum points
    with pytest.raises(ValueError):
        Grid("ring", (16,), (-1.0,))
    with pytest.raises(ValueError):
        Grid("helix", (16,), (1.0,))
    with pytest.raises(ValueError):
        Grid("torus", (16,), (1.0,))        # wrong axis count


def test_spacing_conventions():
    ring = Grid("ring", (10,), (10.0,))
    assert ring.spacing == (1.0,)
    assert ring.axis_coords(0)[-1] == pytest.approx(9.0)
    line = Grid("line", (11,), (10.0,))
    assert line.spacing == (1.0,)
    assert line.axis_coords(0)[0] == pytest.approx(-5.0)
    assert line.axis_coords(0)[-1] == pytest.approx(5.0)


def test_wrap_periodic_only():
    g = Grid("ring", (8,), (2.0,))
    assert g.wrap(np.array([[2.5]]))[0, 0] == pytest.approx(0.5)
    gl = Grid("line", (8,), (2.0,))
    assert gl.wrap(np.array([[0.9]]))[0, 0] == pytest.approx(0.9)


def test_field_shape_and_finiteness_checks():
    g = Grid("ring", (8,), (1.0,))
    with pytest.raises(ValueError):
        ScalarField(g, np.zeros(9))
    with pytest.raises(NonFiniteFieldError):
        ScalarField(g, np.full(8, np.nan))
    with pytest.raises(NonFiniteFieldError):
        VectorField(g, np.full((8, 1), np.inf))


def test_phase_record_windings():
    g = Grid("ring", (16,), (2 * np.pi,))
    rec = PhaseRecord(ScalarField.full(g, 0.0), (3,), winding_scale=1.0)
    assert rec.loop_increment(0) == pytest.approx(2 * np.pi * 3)
    assert rec.ramp_slope(0) == pytest.approx(3.0)
    line = Grid("line", (16,), (1.0,))
    rec2 = PhaseRecord(ScalarField.full(line, 0.0))
    assert rec2.winding == ()
    with pytest.raises(ValueError):
        PhaseRecord(ScalarField.full(g, 0.0), (1,), winding_scale=0.0)


def test_phase_record_total_values_includes_ramp():
    g = Grid("ring", (16,), (4.0,))
    rec = PhaseRecord(ScalarField.full(g, 0.5), (2,), winding_scale=1.0)
    x = g.axis_coords(0)
    np.testing.assert_allclose(rec.total_values(), 0.5 + 2 * np.pi * 2 / 4.0 * x)


@pytest.mark.parametrize("make", [
    lambda g: ScalarField(g, np.linspace(0, 1, g.size).reshape(g.shape)),
    lambda g: VectorField.constant(g, [1.5] * g.ndim),
    lambda g: ComplexField(g, np.exp(1j * np.linspace(0, 3, g.size)).reshape(g.shape)),
])
@pytest.mark.parametrize("gridspec", [("ring", (8,), (1.0,)), ("plane", (8, 9), (1.0, 2.0))])
def test_field_roundtrip_serialization(tmp_path, make, gridspec):
    g = Grid(*gridspec)
    field = make(g)
    path = tmp_path / "field.csv"
    save_field(field, path)
    back = load_field(path)
    assert back.grid == g
    np.testing.assert_array_equal(back.values, field.values)


def test_csv_has_index_and_coordinates():
    g = Grid("ring", (8,), (8.0,))
    text = field_to_csv(ScalarField.full(g, 2.0))
    lines = text.strip().split("\n")
    assert lines[0] == "index,x0,value"
    assert lines[1].startswith("0,0.0,2.0")
