"""Acoustic symbol transport over multi-harmonic tone chips.

A library and CLI for point-to-point messaging through sound: a
deterministic chip synthesizer maps a 128-token alphabet to 60 ms
multi-harmonic tones, a parameterized channel simulator distorts the
audio (gain, EQ, reverb, clipping, clock drift, colored noise), a
matched-filter bank decodes it back, and an evaluation harness measures
CER/WER/EM with latency accounting. Mel-spectrogram features and a
Griffin-Lim vocoder round-trip audio through the compressed feature
domain used by learned receivers.
"""

from .vocab import (VOCAB_SIZE, BLANK_ID, PAD_ID, SOS_ID, EOS_ID, SPACE_ID,
                    UNK_ID, TokenId, Vocab, VocabEntry, build_vocab, tokenize,
                    detokenize)
from .synth import (SAMPLE_RATE, CHIP_SAMPLES, CHIP_SECONDS, ChipSpec, Waveform,
                    chip_spec, fundamental_hz, synth_chip, synth_message,
                    read_wav, write_wav)
from .dsp import (MelConfig, MelSpectrogram, SpectralDiagnostics, DEFAULT_MEL,
                  mel_filterbank, mel_spectrogram, griffin_lim,
                  griffin_lim_with_residuals, roundtrip_consistency,
                  spectral_diagnostics, save_mel, load_mel)
from .channel import (ChannelConfig, GainStage, EqStage, ReverbStage, ClipStage,
                      DriftStage, NoiseStage, MelAugConfig, RngState, add_noise,
                      gain, parametric_eq, reverb, clip, resample_drift,
                      apply_channel, apply_channel_with_draws, mel_augment,
                      white_noise, pink_noise, brown_noise)
from .receiver import (TemplateBank, DecodeOptions, DecodeResult,
                       build_template_bank, decode, decode_detailed, ctc_collapse)
from .metrics import (EvalRecord, EvalReport, edit_distance, cer, wer, aggregate,
                      format_report_table, REPORT_SCHEMA)
from .corpus import (Message, Manifest, generate_corpus, render_corpus,
                     GENERATOR_VERSION)
from .experiments import ExperimentConfig, run_experiment
from .seeding import SplitMix64, mix64

__version__ = "0.1.0"
