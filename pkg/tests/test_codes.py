import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import frozen
import oracles
from hbacqec.codes import (
    AncillaState,
    CodeKind,
    PipelineSpec,
    build_code,
    build_pipeline,
    closed_form_fidelity,
    critical_rho00,
    optimal_polynomial_discrepancy,
    pipeline_choi,
    pipeline_fidelity,
)
from hbacqec.noise import gate_error_for_fidelity
from hbacqec.qcore import DensityMatrix, apply_channel, channel_fidelity, choi_distance, validate_channel

P_GRID = np.round(np.arange(11) * 0.05, 10)
Q_GRID = np.round(np.arange(11) * 0.1, 10)
GRID = list(itertools.product(P_GRID, Q_GRID))


def fid(kind, p, **kw):
    return channel_fidelity(build_pipeline(PipelineSpec(kind, p, **kw)))


# --- circuits ----------------------------------------------------------------


@pytest.mark.parametrize("kind", ["traditional", "optimal"])
def test_code_unitaries_match_bit_oracle(kind):
    code = build_code(kind)
    enc, dec = oracles.code_unitaries(kind)
    np.testing.assert_allclose(code.encoder.matrix, enc, atol=1e-15)
    np.testing.assert_allclose(code.decoder.matrix, dec, atol=1e-15)


def test_traditional_encoder_gives_hadamard_codeword():
    ket = np.zeros(8)
    ket[0] = 1
    np.testing.assert_allclose(build_code("traditional").encoder.matrix @ ket, np.full(8, 8**-0.5), atol=1e-15)


def test_optimal_decoder_inverts_encoder():
    code = build_code(CodeKind.OPTIMAL)
    np.testing.assert_allclose(code.decoder.matrix @ code.encoder.matrix, np.eye(8), atol=1e-14)


def test_code_kind_parse():
    assert CodeKind.parse("OPTIMAL") is CodeKind.OPTIMAL
    with pytest.raises(ValueError):
        CodeKind.parse("shor")


# --- specs -------------------------------------------------------------------


def test_pipeline_spec_validation():
    with pytest.raises(ValueError):
        PipelineSpec("optimal", 0.1)
    with pytest.raises(ValueError):
        PipelineSpec("optimal", 0.1, q=0.2, ancilla=AncillaState.pure())
    with pytest.raises(ValueError):
        PipelineSpec("optimal", 1.2, q=0.2)
    with pytest.raises(ValueError):
        PipelineSpec("optimal", 0.1, q=0.2, c=2.0)


def test_ancilla_state_validation():
    with pytest.raises(ValueError):
        AncillaState(0.5, 0.5, 0.5, -0.5)
    with pytest.raises(ValueError):
        AncillaState(0.5, 0.1, 0.1, 0.1)
    anc = AncillaState.from_mixing(0.4)
    assert anc.rho00 == pytest.approx(0.64, abs=1e-15)
    assert anc.rho01 == anc.rho10 == pytest.approx(0.16, abs=1e-15)
    np.testing.assert_allclose(AncillaState.from_polarizations(0.6, 0.6).diagonal(), anc.diagonal(), atol=1e-15)


# --- pipeline examples -------------------------------------------------------


def test_traditional_noiseless_pure_is_identity():
    assert fid("traditional", 0.0, q=0.0) == pytest.approx(1, abs=1e-14)


def test_flipped_ancillas_expose_the_toffoli():
    bad = AncillaState(0.0, 0.0, 0.0, 1.0)
    ground = DensityMatrix.basis(0, 1)
    opt = apply_channel(ground, build_pipeline(PipelineSpec("optimal", 0.0, ancilla=bad)))
    trad = apply_channel(ground, build_pipeline(PipelineSpec("traditional", 0.0, ancilla=bad)))
    np.testing.assert_allclose(opt.data, ground.data, atol=1e-14)
    np.testing.assert_allclose(trad.data, DensityMatrix.basis(1, 1).data, atol=1e-14)


def test_documented_values():
    assert fid("traditional", 0.0, q=0.4) == pytest.approx(0.96, abs=1e-12)
    assert fid("optimal", 0.1, ancilla=AncillaState.from_diagonal([0.64, 0.16, 0.16, 0.04])) == pytest.approx(
        0.92016, abs=1e-12)
    assert closed_form_fidelity("traditional", 0.2, 0.0)["polynomial"] == pytest.approx(0.896, abs=1e-15)
    assert fid("traditional", 0.2, q=0.0) == pytest.approx(0.896, abs=1e-12)


@pytest.mark.parametrize("p", P_GRID)
def test_optimal_with_pure_ancillas(p):
    assert fid("optimal", p, q=0.0) == pytest.approx(1 - 3 * p**2 + 2 * p**3, abs=1e-12)


@pytest.mark.parametrize("p", P_GRID)
def test_optimal_half_rho00_is_break_even(p):
    anc = AncillaState(0.5, 0.5, 0.0, 0.0)
    assert fid("optimal", p, ancilla=anc) == pytest.approx(1 - p, abs=1e-12)


# --- grid oracles --------------------------------------------------------------


@pytest.fixture(scope="module")
def grid_fidelities():
    return {(kind, p, q): fid(kind, p, q=q) for kind in ("traditional", "optimal") for p, q in GRID}


def test_traditional_matches_polynomial(grid_fidelities):
    for p, q in GRID:
        forms = closed_form_fidelity("traditional", p, q)
        assert grid_fidelities["traditional", p, q] == pytest.approx(forms["polynomial"], abs=1e-10)
        assert forms["from_rho"] == pytest.approx(forms["polynomial"], abs=1e-13)


def test_optimal_matches_from_rho(grid_fidelities):
    for p, q in GRID:
        forms = closed_form_fidelity("optimal", p, q)
        assert grid_fidelities["optimal", p, q] == pytest.approx(forms["from_rho"], abs=1e-10)
        assert forms["polynomial_consistent"] == pytest.approx(forms["from_rho"], abs=1e-13)


def test_printed_optimal_polynomial_disagrees():
    rows = optimal_polynomial_discrepancy(P_GRID, Q_GRID)
    dev = [abs(r[4] - r[2]) for r in rows]
    assert max(dev) == pytest.approx(0.375, abs=1e-10)
    assert rows[int(np.argmax(dev))][:2] == (0.5, 1.0)
    assert max(abs(r[5] - r[2]) for r in rows) < 1e-10


@pytest.mark.parametrize("kind,p,q", [("traditional", 0.15, 0.3), ("optimal", 0.35, 0.8), ("optimal", 0.5, 1.0)])
def test_grid_points_match_loop_oracle(kind, p, q):
    assert fid(kind, p, q=q) == pytest.approx(oracles.pipeline_fidelity(kind, p, oracles.mixing_ancilla(q)), abs=1e-12)


def test_gate_noise_matches_loop_oracle():
    want = oracles.pipeline_fidelity("optimal", 0.1, oracles.mixing_ancilla(0.3), c=0.02)
    assert fid("optimal", 0.1, q=0.3, c=0.02) == pytest.approx(want, abs=1e-12)


def test_dominance(grid_fidelities):
    for p, q in GRID:
        assert grid_fidelities["optimal", p, q] >= grid_fidelities["traditional", p, q] - 1e-14


def test_usefulness_sign(grid_fidelities):
    for p, q in GRID:
        if not 0 < p < 0.5:
            continue
        rho00 = (1 - q / 2) ** 2
        gain = grid_fidelities["optimal", p, q] - (1 - p)
        if abs(rho00 - 0.5) > 1e-12:
            assert np.sign(gain) == np.sign(rho00 - 0.5)


@settings(max_examples=30, deadline=None)
@given(w=st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda w: sum(w) > 1e-3))
def test_toffoli_argument(w):
    probs = np.array(w) / sum(w)
    probs[-1] = 1 - probs[:3].sum()
    if probs[-1] < 0:
        probs[-1] = 0
        probs /= probs.sum()
    anc = AncillaState.from_diagonal(probs)
    assert fid("optimal", 0.0, ancilla=anc) == pytest.approx(1, abs=1e-12)


# --- two evaluation routes -------------------------------------------------------


@pytest.mark.parametrize("kind,p,q,c", [
    ("traditional", 0.2, 0.4, 0.0),
    ("optimal", 0.3, 0.1, 0.0),
    ("traditional", 0.1, 0.5, 0.03),
    ("optimal", 0.25, 0.6, 0.01),
])
def test_kraus_and_state_routes_agree(kind, p, q, c):
    spec = PipelineSpec(kind, p, q=q, c=c)
    chan = build_pipeline(spec)
    assert chan.operators.shape[1:] == (2, 2)
    assert validate_channel(chan).cptp
    assert choi_distance(chan, pipeline_choi(spec)) < 1e-12
    assert channel_fidelity(chan) == pytest.approx(pipeline_fidelity(spec), abs=1e-12)


def test_exact_noisy_composition_is_unpruned():
    chan = build_pipeline(PipelineSpec("optimal", 0.1, q=0.2, c=0.01))
    assert chan.n_operators == 4 * 64 * 8 * 64 * 4


def test_per_gate_noise_option():
    spec = PipelineSpec("optimal", 0.1, q=0.2, c=0.01, decompose_gate_noise=True)
    chan = build_pipeline(spec)
    assert validate_channel(chan).cptp
    assert channel_fidelity(chan) == pytest.approx(pipeline_fidelity(spec), abs=1e-12)
    whole = pipeline_fidelity(PipelineSpec("optimal", 0.1, q=0.2, c=0.01))
    assert channel_fidelity(chan) < whole


def test_per_gate_noise_is_inert_without_noise():
    a = PipelineSpec("optimal", 0.2, q=0.3, decompose_gate_noise=True)
    b = PipelineSpec("optimal", 0.2, q=0.3)
    assert choi_distance(build_pipeline(a), build_pipeline(b)) < 1e-14


# --- thresholds --------------------------------------------------------------


@pytest.mark.parametrize("p", [0.01, 0.1, 0.25, 0.4, 0.49])
def test_optimal_threshold_is_half(p):
    crit = critical_rho00("optimal", p)
    assert crit.attainable
    assert crit.rho00 == pytest.approx(0.5, abs=1e-9)


def test_traditional_threshold_tends_to_one():
    small = critical_rho00("traditional", 1e-4)
    larger = critical_rho00("traditional", 1e-3)
    assert 1 > small.rho00 > larger.rho00 > 0.9
    # leading balance q**2 / 4 ~ p
    assert small.q == pytest.approx(2 * math.sqrt(1e-4), rel=0.05)
    assert larger.q == pytest.approx(2 * math.sqrt(1e-3), rel=0.1)


def test_traditional_threshold_lies_on_break_even():
    crit = critical_rho00("traditional", 0.2)
    assert fid("traditional", 0.2, q=crit.q) == pytest.approx(0.8, abs=1e-10)


def test_imperfect_gates_raise_threshold():
    c = gate_error_for_fidelity(0.99)
    assert c == pytest.approx(frozen.C_FOR_99_PERCENT, abs=1e-15)
    for p in (0.05, 0.2, 0.35, 0.45):
        crit = critical_rho00("optimal", p, c=c)
        assert crit.rho00 > 0.5
        if crit.attainable:
            assert fid("optimal", p, q=crit.q, c=c) == pytest.approx(1 - p, abs=1e-10)


def test_threshold_domain():
    with pytest.raises(ValueError):
        critical_rho00("optimal", 0.0)
    with pytest.raises(ValueError):
        critical_rho00("optimal", 0.5)
