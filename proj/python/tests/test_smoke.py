import json
import math

import pytest

import entdim
from entdim import Measure


def test_interval_mass_and_round_trip():
    mu = Measure.bernoulli(1 / 3)
    assert mu.interval_mass(0.0, 1.5) == pytest.approx(0.5)
    again = Measure.from_json(mu.to_json())
    assert again.to_json() == mu.to_json()
    assert json.loads(mu.to_json())["type"] == "bernoulli"


def test_spec_error_names_field():
    with pytest.raises(ValueError, match="lambda"):
        Measure.from_json('{"type": "bernoulli", "lambda": 0.9}')


def test_entropy_of_uniform_with_gaussian_kernel_is_small():
    r = entdim.entropy(Measure.uniform(0.0, 1.0), 1e-3)
    assert abs(r["value"]) < 0.01
    assert not r["flagged"]


def test_dimension_routes_on_cantor_quarter():
    mu = Measure.bernoulli(0.25)
    assert entdim.delta_c_entropy(mu)["value"] == pytest.approx(0.5, abs=0.05)
    assert entdim.delta_c_fractal(mu, samples=5000)["value"] == pytest.approx(0.5, abs=0.05)
    assert entdim.delta_c_fisher(mu)["value"] == pytest.approx(0.5, abs=0.05)
    assert entdim.delta_square(mu)["value"] == pytest.approx(0.5, abs=0.1)


def test_fisher_of_point_mass():
    assert entdim.fisher(Measure.dirac(), 0.25) == pytest.approx(4.0)
    assert entdim.fisher_variational(Measure.dirac(), 2.0) == pytest.approx(0.5, rel=0.01)
    assert entdim.optimal_K(Measure.dirac(), 0.1, 1.0) == 0.0
    distance, reference = entdim.dudley_diagnostic(Measure.dirac(), 0.01, 0.0)
    assert distance == pytest.approx(math.sqrt(0.02 / math.pi), rel=1e-4)
    assert reference == pytest.approx(0.1)


def test_free_dimension():
    two = Measure.atomic([0.0, 1.0], [0.5, 0.5])
    assert entdim.free_dimension(two) == 0.5
    mix = Measure.mixture([(0.5, Measure.dirac(0.0)), (0.5, Measure.uniform(0.0, 1.0))])
    assert entdim.free_dimension(mix) == pytest.approx(0.75)


def test_pushforward_keeps_dimension():
    mu = Measure.linear_sine_image(Measure.uniform(0.0, 1.0), 2.0, 0.0, 1.0)
    assert entdim.delta_c_entropy(mu)["value"] == pytest.approx(1.0, abs=0.05)


def test_cli_and_verify(tmp_path):
    spec = tmp_path / "two.json"
    spec.write_text('{"type": "atomic", "positions": [0, 1], "weights": [0.5, 0.5]}')
    code, out, err = entdim.run_cli(["freedim", "--measure", str(spec)])
    assert code == 0 and out == '{"value": 0.5}\n'
    code, _, err = entdim.run_cli(["freedim"])
    assert code == 2
    rows = entdim.verify("freedim", 7)
    assert [r["check"] for r in rows] == ["freedim.superaffine", "freedim.range", "freedim.equal_atoms"]
    assert all(r["passed"] for r in rows)
    assert math.isfinite(entdim.entropy(Measure.dirac(), 0.1, kernel="box")["value"])
