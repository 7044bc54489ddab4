import numpy as np
import pytest

from chiplink.channel import RngState, add_noise, gain, resample_drift
from chiplink.receiver import (DecodeOptions, build_template_bank, ctc_collapse,
                               decode, decode_detailed)
from chiplink.synth import CHIP_SAMPLES, Waveform, synth_message
from chiplink.vocab import UNK_ID

from conftest import random_token_ids


def test_bank_shape_and_norms(bank):
    assert bank.templates.shape == (128, 960)
    norms = np.linalg.norm(bank.templates, axis=1)
    np.testing.assert_allclose(norms, np.ones(128), atol=1e-6)


def test_bank_templates_distinct(bank):
    gram = bank.templates @ bank.templates.T
    np.fill_diagonal(gram, 0.0)
    assert gram.max() < 0.999


def test_bank_self_consistency(bank):
    # each clean chip correlates best with its own template
    gram = bank.templates @ bank.templates.T
    assert (gram.argmax(axis=1) == np.arange(128)).all()


def test_clean_roundtrip_random_messages(bank):
    gen = np.random.default_rng(2024)
    for _ in range(50):
        ids = random_token_ids(gen)
        assert decode(synth_message(ids), bank) == ids


def test_silence_decodes_to_unk(bank):
    silent = Waveform(np.zeros(CHIP_SAMPLES))
    assert decode(silent, bank) == [UNK_ID]


def test_short_input_rejected(bank):
    with pytest.raises(ValueError, match="message too short"):
        decode(Waveform(np.zeros(CHIP_SAMPLES - 1)), bank)


def test_sample_rate_mismatch_rejected(bank):
    with pytest.raises(ValueError, match="sample-rate"):
        decode(Waveform(np.zeros(2000), sample_rate=8000), bank)


def test_gain_invariance(bank):
    ids = [7, 99, 45, 3]
    w = synth_message(ids)
    for db in (-12.0, -6.0, 0.0, 6.0):
        assert decode(gain(w, db), bank) == ids


def test_drift_recovery_on_grid(bank):
    ids = [12, 80, 33, 101, 5, 64]
    w = synth_message(ids)
    for factor in (0.99, 0.995, 1.005, 1.01):
        drifted = resample_drift(w, factor)
        result = decode_detailed(drifted, bank)
        assert result.tokens == ids
        assert result.drift == factor


def test_offset_search_recovers_shifted_signal(bank):
    ids = [25, 70, 110]
    w = synth_message(ids)
    for shift in (1, 37, 400):
        shifted = Waveform(np.concatenate([np.zeros(shift), w.samples]))
        opts = DecodeOptions(offset_search=512)
        result = decode_detailed(shifted, bank, opts)
        assert result.offset == shift
        assert result.tokens == ids


def test_offset_zero_by_default(bank):
    result = decode_detailed(synth_message([1, 2]), bank)
    assert result.offset == 0
    assert result.drift == 1.0


def test_decode_under_noise_monotone_samples(bank):
    # heavy noise degrades, light noise does not; spot check at two points
    gen = np.random.default_rng(3)
    errs = {snr: 0 for snr in (-15.0, 5.0)}
    total = 0
    for _ in range(20):
        ids = random_token_ids(gen, low_len=5, high_len=15)
        w = synth_message(ids)
        total += len(ids)
        for snr in errs:
            noisy = add_noise(w, "white", snr, RngState.from_seed(int(gen.integers(1 << 60))))
            got = decode(noisy, bank)
            errs[snr] += sum(a != b for a, b in zip(got, ids)) + abs(len(got) - len(ids))
    assert errs[5.0] == 0
    assert errs[-15.0] > 0


def test_decode_detailed_scores(bank):
    ids = [42, 43]
    result = decode_detailed(synth_message(ids), bank)
    assert len(result.scores) == 2
    np.testing.assert_allclose(result.scores, 1.0, atol=1e-9)


def test_decode_options_validation():
    with pytest.raises(ValueError, match="1.0"):
        DecodeOptions(drift_search=(0.99, 1.01))
    with pytest.raises(ValueError):
        DecodeOptions(score_floor=1.0)
    with pytest.raises(ValueError):
        DecodeOptions(offset_search=-1)


def test_score_floor_emits_unk(bank):
    ids = [15, 16]
    w = synth_message(ids)
    # floor at ~1 forces every window below threshold
    opts = DecodeOptions(score_floor=0.9999999)
    got = decode(Waveform(np.concatenate([w.samples[:960], np.zeros(960)])),
                 bank, opts)
    assert got[1] == UNK_ID


def test_ctc_collapse_rules():
    assert ctc_collapse([7, 7, 0, 8], blank=0) == [7, 8]
    assert ctc_collapse([0, 0], blank=0) == []
    assert ctc_collapse([7, 0, 7], blank=0) == [7, 7]
    assert ctc_collapse([], blank=0) == []


def test_ctc_collapse_idempotent_without_blanks():
    # applies when the output has no consecutive repeats and no blanks
    out = ctc_collapse([5, 5, 0, 6, 7, 7], blank=0)
    assert out == [5, 6, 7]
    assert ctc_collapse(out, blank=0) == out
