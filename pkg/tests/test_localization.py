"""Decay fits of eigenvectors and the dynamical position moment."""

import math

import numpy as np
import pytest
import scipy.linalg

from andlab.errors import DomainError, ResourceError
from andlab.msa import (
    DynamicalMomentSpec,
    dynamical_moment,
    eigenfunction_decay_fit,
)
from andlab.msa.localization import default_time_grid
from andlab.spectral import spectral_bottom


class TestDecayFit:
    def test_strong_disorder_ground_state_is_localized(self, make_hamiltonian):
        h = make_hamiltonian(length=16, seed=7, scale=10.0)
        fits = eigenfunction_decay_fit(h, k=4)
        assert [f.index for f in fits] == [0, 1, 2, 3]
        eigenvalues = [f.eigenvalue for f in fits]
        assert eigenvalues == sorted(eigenvalues)
        ground = fits[0]
        assert ground.localized
        assert ground.rate > 0.5
        assert ground.r_squared > 0.9
        assert ground.shells_used >= 3
        assert 0 <= ground.peak_index < h.dim

    def test_disorder_steepens_the_envelope(self, make_hamiltonian):
        strong = eigenfunction_decay_fit(make_hamiltonian(length=16, seed=7, scale=10.0), k=1)[0]
        free = eigenfunction_decay_fit(make_hamiltonian(length=16, seed=7, scale=0.0), k=1)[0]
        assert strong.rate > 3.0 * free.rate

    def test_eigenvalues_match_spectral_bottom(self, make_hamiltonian):
        h = make_hamiltonian(length=8, seed=3, scale=2.0)
        fits = eigenfunction_decay_fit(h, k=3)
        data = spectral_bottom(h, k=3)
        for fit, ev in zip(fits, data.eigenvalues[:3]):
            assert math.isclose(fit.eigenvalue, float(ev), rel_tol=1e-10)

    def test_validation(self, make_hamiltonian):
        h = make_hamiltonian(length=8)
        with pytest.raises(DomainError):
            eigenfunction_decay_fit(h, k=0)
        with pytest.raises(DomainError):
            eigenfunction_decay_fit(h, k=h.dim + 1)


class TestMomentSpec:
    def test_time_grid_default(self):
        grid = default_time_grid(count=16, t_min=0.5, t_max=32.0)
        assert len(grid) == 16
        assert grid[0] == pytest.approx(0.5)
        assert grid[-1] == pytest.approx(32.0)
        ratios = np.diff(np.log(grid))
        assert np.allclose(ratios, ratios[0])

    def test_time_grid_validation(self):
        with pytest.raises(DomainError):
            default_time_grid(count=1)
        with pytest.raises(DomainError):
            default_time_grid(t_min=0.0)
        with pytest.raises(DomainError):
            default_time_grid(t_min=2.0, t_max=1.0)

    def test_spec_validation(self):
        good = dict(s=1.0, interval_low=0.0, interval_high=1.0, region_radius=1.0)
        DynamicalMomentSpec(time_grid=(0.0, 1.0), **good)  # t = 0 is allowed
        with pytest.raises(DomainError):
            DynamicalMomentSpec(time_grid=(1.0,), **{**good, "s": 0.0})
        with pytest.raises(DomainError):
            DynamicalMomentSpec(time_grid=(1.0,), **{**good, "interval_high": -1.0})
        with pytest.raises(DomainError):
            DynamicalMomentSpec(time_grid=(1.0,), **{**good, "region_radius": -0.5})
        with pytest.raises(DomainError):
            DynamicalMomentSpec(time_grid=(), **good)
        with pytest.raises(DomainError):
            DynamicalMomentSpec(time_grid=(1.0, float("nan")), **good)
        with pytest.raises(DomainError):
            DynamicalMomentSpec(time_grid=(-1.0,), **good)


class TestDynamicalMoment:
    def test_matches_matrix_exponential_oracle(self, make_hamiltonian):
        h = make_hamiltonian(length=4, seed=11, scale=2.0)
        dense = h.dense()
        vals, vecs = np.linalg.eigh(dense)
        spec = DynamicalMomentSpec(
            s=1.5,
            interval_low=float(vals[0]) - 1e-9,
            interval_high=float(vals[2]) + 1e-9,
            region_radius=1.0,
            time_grid=(0.0, 0.7, 3.2),
        )
        trace = dynamical_moment(h, spec)
        points = h.cube.grid_points()
        position = np.max(np.abs(points), axis=1)
        in_window = (vals >= spec.interval_low) & (vals <= spec.interval_high)
        projector = vecs[:, in_window] @ vecs[:, in_window].T
        region = np.flatnonzero(position <= spec.region_radius + 1e-12)
        for t, value in zip(trace.times, trace.values):
            propagator = scipy.linalg.expm(-1j * t * dense)
            block = (position**spec.s)[:, None] * (propagator @ projector)
            expected = np.linalg.norm(block[:, region], 2)
            assert math.isclose(value, float(expected), rel_tol=0, abs_tol=1e-8)
        assert trace.interval_rank == int(np.sum(in_window))
        assert trace.region_size == region.size
        assert trace.grid_max == pytest.approx(float(trace.values.max()))

    def test_empty_window_gives_zero_trace(self, make_hamiltonian):
        h = make_hamiltonian(length=4, seed=11)
        e0 = spectral_bottom(h, k=1).e0
        spec = DynamicalMomentSpec(
            s=1.0,
            interval_low=e0 - 2.0,
            interval_high=e0 - 1.0,
            region_radius=1.0,
            time_grid=(0.1, 1.0),
        )
        trace = dynamical_moment(h, spec)
        assert trace.interval_rank == 0
        assert trace.grid_max == 0.0
        assert np.all(trace.values == 0.0)

    def test_dimension_cap(self, make_hamiltonian):
        h = make_hamiltonian(length=2048)
        spec = DynamicalMomentSpec(
            s=1.0, interval_low=0.0, interval_high=1.0, region_radius=1.0, time_grid=(1.0,)
        )
        with pytest.raises(ResourceError):
            dynamical_moment(h, spec)
