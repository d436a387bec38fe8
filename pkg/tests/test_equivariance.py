"""Density transport by the guided flow at reduced scale."""

import numpy as np

from typicality_lab import Grid, RngStream
from typicality_lab.bohmian import eigenstate_superposition, harmonic_eigenstate
from typicality_lab.bohmian.equivariance import equivariance_check

GRID = Grid(1, 512, 40.0)
BEAT = 2 * np.pi


def test_initial_distance_sits_at_sampling_noise():
    wf = eigenstate_superposition(GRID, {0: 1.0, 1: 1.0})
    report = equivariance_check(
        wf,
        n_samples=4000,
        t_checkpoints=[BEAT / 8],
        rng=RngStream(0),
        wave_dt=BEAT / 1024,
        frame_stride=4,
    )
    rows = report.table("checkpoints").rows
    t0_row = rows[0]
    assert t0_row[0] == 0.0
    assert t0_row[1] <= t0_row[3]  # within the 99% noise quantile


def test_stationary_state_stays_at_noise_floor_at_all_times():
    gs = harmonic_eigenstate(GRID, 0)
    report = equivariance_check(
        gs,
        n_samples=4000,
        t_checkpoints=[BEAT / 4, BEAT / 2, BEAT],
        rng=RngStream(1),
        wave_dt=BEAT / 1024,
        frame_stride=4,
    )
    for row in report.table("checkpoints").rows:
        assert row[1] <= 1.5 * row[3]
    assert report.metric("clamp_rate").value == 0.0


def test_superposition_beat_period_within_tolerance():
    wf = eigenstate_superposition(GRID, {0: 1.0, 1: 1.0})
    checkpoints = [BEAT * (k + 1) / 4 for k in range(4)]
    report = equivariance_check(
        wf,
        n_samples=4000,
        t_checkpoints=checkpoints,
        rng=RngStream(2),
        wave_dt=BEAT / 2048,
        frame_stride=4,
        tolerances={"max_checkpoint_l1": 0.08},
    )
    assert report.metric("max_checkpoint_l1").passed
    assert report.metric("clamp_rate").passed
    assert not report.flags["unreliable"]


def test_report_carries_quality_counters():
    wf = eigenstate_superposition(GRID, {0: 1.0, 1: 1.0})
    report = equivariance_check(
        wf,
        n_samples=500,
        t_checkpoints=[BEAT / 8],
        rng=RngStream(3),
        wave_dt=BEAT / 1024,
        frame_stride=4,
    )
    assert report.flags["sample_steps"] == 500 * 32  # 32 steps to the checkpoint
    assert "wrap_events" in report.flags
    assert {t.name for t in report.tables} == {"checkpoints", "final_histogram", "bundle"}
