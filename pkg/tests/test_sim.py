import numpy as np
import pytest

from warpmesh import kernels
from warpmesh.errors import ConfigError, JunctionLookupError, SchemeMismatchError
from warpmesh.lattice import build_square_lattice
from warpmesh.sim import (
    Scheme,
    advance,
    excite_impulse,
    fds_step,
    junction_signals,
    rest_state,
    run_impulse_response,
    scatter,
    scatter_step,
    step,
)

ALPHAS = [0.0, -0.25, -0.45, -0.9]


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b)) / np.max(np.abs(a))


def test_scheme_parse():
    assert Scheme.parse("WTWM") is Scheme.WTWM
    assert Scheme.WFDS.plain is Scheme.FDS
    with pytest.raises(ConfigError):
        Scheme.parse("hex")


def test_scatter_examples(lat6):
    j = lat6.interior[0]
    waves = np.zeros((lat6.size, 6))
    waves[j, 0] = 1.0
    v, out = scatter(lat6, waves)
    assert v[j] == pytest.approx(1 / 3)
    assert out[j].tolist() == pytest.approx([-2 / 3] + [1 / 3] * 5)
    waves[j] = 1.0
    v, out = scatter(lat6, waves)
    assert v[j] == pytest.approx(2.0)
    assert out[j] == pytest.approx(np.ones(6))


def test_rim_reflection_inverts(lat6):
    r = np.flatnonzero(lat6.rim)[0]
    waves = np.zeros((lat6.size, 6))
    waves[r] = [1, 2, 3, 4, 5, 6]
    v, out = scatter(lat6, waves)
    assert v[r] == 0.0
    assert out[r].tolist() == [-1, -2, -3, -4, -5, -6]


def test_scattering_matrix_orthogonal():
    S = np.full((6, 6), 1 / 3) - np.eye(6)
    assert np.max(np.abs(S @ S.T - np.eye(6))) < 1e-12


def test_scatter_preserves_energy(lat6):
    waves = np.random.default_rng(3).standard_normal((lat6.size, 6))
    _, out = scatter(lat6, waves)
    assert np.sum(out**2) == pytest.approx(np.sum(waves**2), rel=1e-12)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_rest_stays_at_rest(lat6, scheme):
    st = rest_state(lat6, scheme, -0.45 if scheme.warped else None)
    for _ in range(5):
        st = step(lat6, st)
    assert st.is_rest()
    assert st.step_count == 5


def test_rest_state_alpha_rules(lat6):
    with pytest.raises(ConfigError):
        rest_state(lat6, "wtwm")
    with pytest.raises(ConfigError):
        rest_state(lat6, "twm", -0.45)
    with pytest.raises(ConfigError):
        rest_state(lat6, "wfds", 0.2)


def test_scheme_mismatch(lat6):
    with pytest.raises(SchemeMismatchError):
        scatter_step(lat6, rest_state(lat6, "fds"))
    with pytest.raises(SchemeMismatchError):
        fds_step(lat6, rest_state(lat6, "twm"))
    with pytest.raises(SchemeMismatchError):
        step(build_square_lattice(8), rest_state(lat6, "twm"))


def test_excite_errors(lat6):
    st = rest_state(lat6, "twm")
    with pytest.raises(ConfigError):
        excite_impulse(st, lat6, 0, 1.0)
    with pytest.raises(JunctionLookupError):
        excite_impulse(st, lat6, 10_000, 1.0)
    assert excite_impulse(st, lat6, lat6.center, 0.0).is_rest()


def test_first_samples_twm(lat6):
    # junction signal of the excited junction: 1, then 0, then the six neighbours return 1/3 each...
    rec = run_impulse_response(lat6, "twm", steps=4).samples
    assert rec[0] == pytest.approx(1.0)
    assert rec[1] == pytest.approx(0.0, abs=1e-15)
    fds = run_impulse_response(lat6, "fds", steps=4).samples
    assert np.allclose(rec, fds, atol=1e-15)


def test_fds_rim_identically_zero(lat6):
    st = excite_impulse(rest_state(lat6, "fds"), lat6, lat6.center, 1.0)
    for _ in range(50):
        st = fds_step(lat6, st)
        assert np.all(st.p_now[lat6.rim] == 0.0)


def test_twm_equals_fds(lat12):
    a = run_impulse_response(lat12, "twm", steps=2000).normalized()
    b = run_impulse_response(lat12, "fds", steps=2000).normalized()
    assert rel_err(a, b) < 1e-9


@pytest.mark.parametrize("alpha", ALPHAS)
def test_wtwm_equals_wfds(lat12, alpha):
    a = run_impulse_response(lat12, "wtwm", alpha, steps=2000).normalized()
    b = run_impulse_response(lat12, "wfds", alpha, steps=2000).normalized()
    assert rel_err(a, b) < 1e-9


def test_off_centre_equivalence(lat12):
    i, o = int(lat12.interior[3]), int(lat12.interior[40])
    a = run_impulse_response(lat12, "wtwm", -0.45, 800, i, o).samples
    b = run_impulse_response(lat12, "wfds", -0.45, 800, i, o).samples
    assert np.max(np.abs(a - b)) < 1e-12


def test_alpha_zero_is_doubled_delay(lat6):
    # with alpha=0 every delay is z^-2: the warped run is the plain run at half speed
    plain = run_impulse_response(lat6, "fds", steps=200).samples
    warped = run_impulse_response(lat6, "wfds", 0.0, steps=400).samples
    assert np.allclose(warped[::2], plain, atol=1e-12)
    assert np.allclose(warped[1::2], 0.0, atol=1e-12)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_linearity(lat6, scheme):
    alpha = -0.45 if scheme.warped else None
    i, k = int(lat6.interior[0]), int(lat6.interior[-1])
    a = run_impulse_response(lat6, scheme, alpha, 300, i, lat6.center).samples
    b = run_impulse_response(lat6, scheme, alpha, 300, k, lat6.center).samples
    st = rest_state(lat6, scheme, alpha)
    st = excite_impulse(st, lat6, i, 2.0)
    st = excite_impulse(st, lat6, k, -3.0)
    both = advance(lat6, st, 300, lat6.center)
    assert np.max(np.abs(both - (2 * a - 3 * b))) < 1e-12


@pytest.mark.parametrize("alpha", ALPHAS)
def test_bounded_long_run(lat6, alpha):
    for scheme in ("wtwm", "wfds"):
        rec = run_impulse_response(lat6, scheme, alpha, 100_000).samples
        assert np.all(np.isfinite(rec))
        assert np.max(np.abs(rec)) < 10.0


def test_bounded_plain_long_run(lat6):
    for scheme in ("twm", "fds"):
        rec = run_impulse_response(lat6, scheme, None, 100_000).samples
        assert np.max(np.abs(rec)) < 10.0


def test_twm_energy_conserved(lat6):
    st = excite_impulse(rest_state(lat6, "twm"), lat6, lat6.center, 1.0)
    e0 = np.sum(st.waves**2)
    for _ in range(300):
        st = scatter_step(lat6, st)
    assert np.sum(st.waves**2) == pytest.approx(e0, rel=1e-12)


@pytest.mark.skipif(not kernels.NUMBA_ENABLED, reason="numba backend disabled")
@pytest.mark.parametrize("scheme", list(Scheme))
def test_backend_parity(lat12, scheme):
    alpha = -0.45 if scheme.warped else None
    a = run_impulse_response(lat12, scheme, alpha, 500, use_numba=True).samples
    b = run_impulse_response(lat12, scheme, alpha, 500, use_numba=False).samples
    assert np.max(np.abs(a - b)) < 1e-13


@pytest.mark.parametrize("scheme", list(Scheme))
def test_step_matches_advance(lat6, scheme):
    alpha = -0.45 if scheme.warped else None
    st = excite_impulse(rest_state(lat6, scheme, alpha), lat6, lat6.center, 1.0)
    rec = []
    for _ in range(40):
        rec.append(junction_signals(lat6, st)[lat6.center])
        st = step(lat6, st)
    ref = run_impulse_response(lat6, scheme, alpha, 40).samples
    assert np.allclose(rec, ref, atol=1e-14)


def test_probe_record(lat6):
    rec = run_impulse_response(lat6, "twm", steps=10)
    assert len(rec) == 10
    assert rec.junction == lat6.center
    with pytest.raises(ValueError):
        rec.samples[0] = 3.0
    with pytest.raises(ConfigError):
        run_impulse_response(lat6, "twm", steps=0)
