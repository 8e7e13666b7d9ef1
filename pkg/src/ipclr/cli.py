"""Command-line front end: signal synthesis, spectrogram export, rank-k
approximation sweeps, and the nuclear-norm denoiser.

Option precedence is flags > config file > defaults; the config file is a
flat ``key = value`` text format whose keys match the long option names
with dashes replaced by underscores.  Exit codes: 0 success, 1 validation
error, 2 numerical failure.  The IPCLR_THREADS environment variable caps
sweep parallelism.
"""

from __future__ import annotations

import math
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import experiments
from .denoise import AdmmParams, NumericalError, denoise, estimate_if_for, lambda_sweep
from .frames import StftConfig, analysis_window, hann_window, istft, one_sided, stft
from .io import read_wav, write_matrix_csv, write_wav
from .ipc import build_corrector, ipc_istft, ipc_stft
from .lowrank import rank_k_approx
from .signals import (
    SignalBuffer,
    SinusoidSpec,
    add_noise_at_snr,
    snr_db,
    synth_sinusoid_sum,
)


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    conf = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}:{line_no}: expected key=value")
        key, value = line.split("=", 1)
        conf[key.strip().replace("-", "_")] = value.strip()
    return conf


def _with_config(ctx: click.Context, **values):
    """Apply config-file values for options left at their defaults."""
    conf = (ctx.obj or {}).get("config", {})
    out = {}
    for name, current in values.items():
        source = ctx.get_parameter_source(name)
        if name in conf and source != click.core.ParameterSource.COMMANDLINE:
            raw = conf[name]
            if isinstance(current, bool):
                out[name] = raw.lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int) and not isinstance(current, bool):
                out[name] = int(raw)
            elif isinstance(current, float):
                out[name] = float(raw)
            else:
                out[name] = raw
        else:
            out[name] = current
    return out


def _require_file(path: str):
    if not Path(path).is_file():
        raise click.UsageError(f"input file not found: {path}")


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stft_config(window_len: int, shift_div: int, tight: bool = False) -> StftConfig:
    if shift_div < 1:
        raise click.UsageError("shift divisor must be at least 1")
    try:
        return StftConfig(
            window_len=window_len,
            hop=window_len // shift_div,
            window_kind="hann_tight" if tight else "hann",
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _format_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.10g}"


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Flat key=value config file (flags take precedence).")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None):
    """Phase-corrected low-rank spectrogram tools."""
    if config_path:
        _require_file(config_path)
    ctx.obj = {"config": _load_config(config_path)}


@cli.command("synth")
@click.option("--count", default=3, show_default=True,
              help="Number of harmonics in the default recipe.")
@click.option("--base-freq", default=100.0, show_default=True,
              help="Fundamental frequency in Hz for the default recipe.")
@click.option("--freq", "freqs", multiple=True, type=float,
              help="Explicit frequency in Hz (repeatable; overrides the recipe).")
@click.option("--amp", "amps", multiple=True, type=float,
              help="Amplitude per explicit frequency (repeatable).")
@click.option("--duration", default=1.0, show_default=True, help="Duration in seconds.")
@click.option("--rate", default=16000.0, show_default=True, help="Sample rate in Hz.")
@click.option("--snr", default=math.inf, help="Add seeded noise at this SNR in dB.")
@click.option("--seed", default=0, show_default=True)
@click.option("--normalize/--no-normalize", default=True, show_default=True,
              help="Scale so the clean signal peaks at 0.9 before writing "
                   "(same scale with or without --snr, so clean/noisy pairs "
                   "stay comparable).")
@click.option("-o", "--output", default="signal.wav", show_default=True)
@click.pass_context
def cmd_synth(ctx, count, base_freq, freqs, amps, duration, rate, snr, seed,
              normalize, output):
    """Synthesize a sum-of-sinusoids WAV, optionally with seeded noise."""
    p = _with_config(ctx, count=count, base_freq=base_freq, duration=duration,
                     rate=rate, snr=snr, seed=seed)
    if not p["duration"] > 0:
        raise click.UsageError("duration must be positive")
    if freqs:
        if amps and len(amps) != len(freqs):
            raise click.UsageError("--amp count must match --freq count")
        amplitudes = amps or [1.0] * len(freqs)
        specs = [SinusoidSpec(a, f) for a, f in zip(amplitudes, freqs)]
    else:
        specs = experiments.harmonic_specs(p["count"], p["base_freq"])
    signal = synth_sinusoid_sum(specs, p["duration"], p["rate"])
    if normalize:
        peak = float(np.max(np.abs(signal.samples)))
        if peak > 0:
            signal = SignalBuffer(signal.samples * (0.9 / peak), signal.sample_rate_hz)
    if not math.isinf(p["snr"]):
        signal = add_noise_at_snr(signal, p["snr"], p["seed"])
    write_wav(signal, output, format="float32")
    click.echo(f"wrote {output} ({len(signal)} samples at {signal.sample_rate_hz:g} Hz)")


@cli.command("spectrogram")
@click.argument("input_wav", type=click.Path())
@click.option("--window-len", default=4096, show_default=True)
@click.option("--shift-div", default=4, show_default=True,
              help="Hop is window-len divided by this.")
@click.option("--framing", default="valid", show_default=True,
              type=click.Choice(["valid", "cover"]))
@click.option("--ipc/--no-ipc", default=False, show_default=True,
              help="Also export the phase-corrected spectrogram and IF map.")
@click.option("--one-sided/--two-sided", "half", default=True, show_default=True)
@click.option("-o", "--outdir", default="spectrogram_out", show_default=True)
@click.pass_context
def cmd_spectrogram(ctx, input_wav, window_len, shift_div, framing, ipc, half, outdir):
    """Export amplitude/complex spectrogram CSVs (and IF map with --ipc)."""
    p = _with_config(ctx, window_len=window_len, shift_div=shift_div,
                     framing=framing, ipc=ipc)
    _require_file(input_wav)
    config = _stft_config(p["window_len"], p["shift_div"])
    signal = read_wav(input_wav)
    spec = stft(signal, config, hann_window(config.window_len), framing=p["framing"])
    data = one_sided(spec.data) if half else spec.data
    out = _outdir(outdir)
    stem = Path(input_wav).stem
    write_matrix_csv(np.abs(data), out / f"{stem}_amplitude.csv")
    write_matrix_csv(data, out / f"{stem}_complex.csv")
    written = 2
    if p["ipc"]:
        if_map = estimate_if_for(signal, config) if p["framing"] == "cover" else \
            experiments.estimate_if_valid(signal, config)
        corrector = build_corrector(if_map)
        corrected = ipc_stft(spec, corrector).data
        corrected = one_sided(corrected) if half else corrected
        write_matrix_csv(corrected, out / f"{stem}_ipc.csv")
        values = one_sided(if_map.values) if half else if_map.values
        write_matrix_csv(values, out / f"{stem}_if.csv")
        written += 2
        deviation = np.abs(corrected - corrected[:, :1]).max()
        scale = np.abs(corrected).max()
        click.echo(f"max column deviation of phase-corrected rows: "
                   f"{deviation / scale if scale else 0.0:.3e} (relative)")
    click.echo(f"wrote {written} matrices to {out}")


@cli.command("lowrank")
@click.argument("input_wav", type=click.Path())
@click.option("--k", default=1, show_default=True, help="Approximation rank.")
@click.option("--representation", default="ipc", show_default=True,
              type=click.Choice(list(experiments.REPRESENTATIONS)))
@click.option("--window-len", default=4096, show_default=True)
@click.option("--shift-div", default=4, show_default=True)
@click.option("--clean", "clean_wav", type=click.Path(), default=None,
              help="Clean reference WAV; defaults to the input itself.")
@click.option("--if-source", default="clean", show_default=True,
              type=click.Choice(["clean", "noisy"]))
@click.option("-o", "--output", default=None,
              help="Write the rank-k reconstruction (tight window, cover framing).")
@click.pass_context
def cmd_lowrank(ctx, input_wav, k, representation, window_len, shift_div,
                clean_wav, if_source, output):
    """Rank-k approximation SNR of one spectrogram representation."""
    p = _with_config(ctx, k=k, representation=representation,
                     window_len=window_len, shift_div=shift_div,
                     if_source=if_source)
    _require_file(input_wav)
    if clean_wav:
        _require_file(clean_wav)
    if p["k"] < 1:
        raise click.UsageError("k must be at least 1")
    observed = read_wav(input_wav)
    clean = read_wav(clean_wav) if clean_wav else observed
    if len(clean) != len(observed):
        raise click.UsageError("clean reference length must match the input")
    config = experiments.analysis_config(p["window_len"], p["shift_div"])

    w = hann_window(config.window_len)
    x_clean = one_sided(stft(clean, config, w, framing="valid").data)
    x_obs = one_sided(stft(observed, config, w, framing="valid").data)
    if p["k"] > min(x_obs.shape):
        raise click.UsageError(f"k exceeds the spectrogram rank bound {min(x_obs.shape)}")
    if p["representation"] == "amplitude":
        estimate = rank_k_approx(np.abs(x_obs), p["k"]) * np.exp(1j * np.angle(x_obs))
    elif p["representation"] == "stft":
        estimate = rank_k_approx(x_obs, p["k"])
    else:
        if_signal = clean if p["if_source"] == "clean" else observed
        corrector = build_corrector(experiments.estimate_if_valid(if_signal, config))
        e_half = one_sided(corrector.E)
        estimate = np.conj(e_half) * rank_k_approx(e_half * x_obs, p["k"])
    value = snr_db(x_clean, estimate)
    click.echo(f"representation={p['representation']} shift=1/{p['shift_div']} "
               f"k={p['k']} spectrogram SNR = {_format_db(value)} dB")

    if output:
        tight_cfg = _stft_config(p["window_len"], p["shift_div"], tight=True)
        recon = _reconstruct_rank_k(observed, clean, tight_cfg,
                                    p["representation"], p["k"], p["if_source"])
        write_wav(recon, output, format="float32")
        click.echo(f"time-domain SNR vs clean = "
                   f"{_format_db(snr_db(clean, recon))} dB; wrote {output}")


def _reconstruct_rank_k(observed: SignalBuffer, clean: SignalBuffer,
                        config: StftConfig, representation: str, k: int,
                        if_source: str) -> SignalBuffer:
    """Invertible-pipeline variant: rank-k in cover framing, then synthesis."""
    w = analysis_window(config)
    spec = stft(observed, config, w)
    if representation == "amplitude":
        data = rank_k_approx(np.abs(spec.data), k) * np.exp(1j * np.angle(spec.data))
        return istft(replace(spec, data=data), w)
    if representation == "stft":
        return istft(replace(spec, data=rank_k_approx(spec.data, k)), w)
    if_signal = clean if if_source == "clean" else observed
    corrector = build_corrector(estimate_if_for(if_signal, config))
    corrected = ipc_stft(spec, corrector)
    approx = replace(corrected, data=rank_k_approx(corrected.data, k))
    return ipc_istft(approx, corrector, w)


@cli.command("table1")
@click.option("--seeds", default=10, show_default=True, help="Noise realizations per cell.")
@click.option("--duration", default=experiments.TABLE_DURATION_S, show_default=True)
@click.option("--count", default=3, show_default=True, help="Number of sinusoids.")
@click.option("--window-len", default=4096, show_default=True)
@click.option("--noise-domain", default="tf", show_default=True,
              type=click.Choice(["tf", "time"]))
@click.option("--if-source", default="clean", show_default=True,
              type=click.Choice(["clean", "noisy"]))
@click.option("-o", "--outdir", default="table1_out", show_default=True)
@click.pass_context
def cmd_table1(ctx, seeds, duration, count, window_len, noise_domain, if_source,
               outdir):
    """Rank-1 SNR table: representations x hops x input noise levels."""
    p = _with_config(ctx, seeds=seeds, duration=duration, count=count,
                     window_len=window_len, noise_domain=noise_domain,
                     if_source=if_source)
    if p["seeds"] < 1:
        raise click.UsageError("seeds must be at least 1")
    spec = experiments.ExperimentSpec(
        kind="table1",
        sinusoid_count=p["count"],
        duration_s=p["duration"],
        window_len=p["window_len"],
        seeds=tuple(range(p["seeds"])),
        noise_domain=p["noise_domain"],
        if_source=p["if_source"],
    )
    cells = experiments.run_table1(spec)
    out = _outdir(outdir)
    _write_cells_csv(cells, out / "table1_cells.csv")
    rows = experiments.table1_layout(cells, spec.shift_divisors, spec.input_snrs_db)
    level_keys = [f"snr_in_{level:g}" for level in spec.input_snrs_db]
    lines = ["representation,shift," + ",".join(
        [k.removeprefix("snr_in_") for k in level_keys] + ["clean"])]
    for row in rows:
        cells_txt = [f"{row[k]:.1f}" for k in level_keys] + [f"{row['clean']:.1f}"]
        lines.append(f"{row['representation']},{row['shift']}," + ",".join(cells_txt))
    (out / "table1.csv").write_text("\n".join(lines) + "\n")
    click.echo("\n".join(lines))
    click.echo(f"wrote {out / 'table1.csv'}")


def _write_cells_csv(cells, path):
    lines = ["representation,shift_div,input_snr_db,k,seed,snr_db"]
    for c in cells:
        level = "" if c.input_snr_db is None else f"{c.input_snr_db:g}"
        lines.append(f"{c.representation},{c.shift_divisor},{level},{c.k},"
                     f"{c.seed},{c.snr_db!r}")
    Path(path).write_text("\n".join(lines) + "\n")


@cli.command("fig3")
@click.option("--count", default=3, show_default=True, help="Number of sinusoids H.")
@click.option("--noise/--no-noise", default=False, show_default=True)
@click.option("--input-snr", default=10.0, show_default=True)
@click.option("--k-max", default=8, show_default=True)
@click.option("--k-min", default=1, show_default=True)
@click.option("--duration", default=experiments.TABLE_DURATION_S, show_default=True)
@click.option("--window-len", default=4096, show_default=True)
@click.option("--shift-div", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--if-source", default="clean", show_default=True,
              type=click.Choice(["clean", "noisy"]))
@click.option("-o", "--output", default="fig3.csv", show_default=True)
@click.pass_context
def cmd_fig3(ctx, count, noise, input_snr, k_max, k_min, duration, window_len,
             shift_div, seed, if_source, output):
    """Rank-k SNR curves per representation (CSV of representation,k,snr)."""
    p = _with_config(ctx, count=count, input_snr=input_snr, k_max=k_max,
                     k_min=k_min, duration=duration, window_len=window_len,
                     shift_div=shift_div, seed=seed, if_source=if_source)
    if not 1 <= p["k_min"] <= p["k_max"]:
        raise click.UsageError("need 1 <= k-min <= k-max")
    spec = experiments.ExperimentSpec(
        kind="fig3",
        sinusoid_count=p["count"],
        duration_s=p["duration"],
        window_len=p["window_len"],
        shift_divisors=(p["shift_div"],),
        seeds=(p["seed"],),
        if_source=p["if_source"],
        k_values=tuple(range(p["k_min"], p["k_max"] + 1)),
    )
    cells = experiments.run_fig3(spec, p["input_snr"] if noise else None)
    lines = ["representation,k,snr_db"]
    for c in cells:
        lines.append(f"{c.representation},{c.k},{c.snr_db!r}")
    Path(output).write_text("\n".join(lines) + "\n")
    click.echo(f"wrote {output} ({len(cells)} rows)")


@cli.command("denoise")
@click.argument("input_wav", type=click.Path())
@click.option("--lam", default=1.0, show_default=True, help="Regularization weight.")
@click.option("--rho", default=1.0, show_default=True, help="ADMM penalty.")
@click.option("--iters", default=100, show_default=True)
@click.option("--window-len", default=4096, show_default=True)
@click.option("--shift-div", default=4, show_default=True)
@click.option("--if-oracle", "oracle_wav", type=click.Path(), default=None,
              help="Estimate the IF from this clean WAV instead of the input.")
@click.option("--clean", "clean_wav", type=click.Path(), default=None,
              help="Clean reference for SNR reporting.")
@click.option("-o", "--output", default="denoised.wav", show_default=True)
@click.option("--convergence-csv", default=None,
              help="Write per-iteration objective/residual CSV here.")
@click.pass_context
def cmd_denoise(ctx, input_wav, lam, rho, iters, window_len, shift_div,
                oracle_wav, clean_wav, output, convergence_csv):
    """Nuclear-norm ADMM denoising of a WAV file."""
    p = _with_config(ctx, lam=lam, rho=rho, iters=iters,
                     window_len=window_len, shift_div=shift_div)
    _require_file(input_wav)
    for maybe in (oracle_wav, clean_wav):
        if maybe:
            _require_file(maybe)
    try:
        params = AdmmParams(lam=p["lam"], rho=p["rho"], max_iter=p["iters"])
    except ValueError as exc:
        raise click.UsageError(str(exc))
    config = _stft_config(p["window_len"], p["shift_div"], tight=True)
    observed = read_wav(input_wav)
    if_map = None
    if oracle_wav:
        oracle = read_wav(oracle_wav)
        if len(oracle) != len(observed):
            raise click.UsageError("oracle WAV length must match the input")
        if_map = estimate_if_for(oracle, config)
    result, state = denoise(observed, params, config, if_map=if_map)
    write_wav(result, output, format="float32")
    click.echo(f"wrote {output}; final objective {state.objective_history[-1]:.6g}, "
               f"final primal residual {state.residual_history[-1]:.6g}")
    if clean_wav:
        clean = read_wav(clean_wav)
        if len(clean) != len(observed):
            raise click.UsageError("clean WAV length must match the input")
        before = snr_db(clean, observed)
        after = snr_db(clean, result)
        click.echo(f"SNR: {_format_db(before)} dB -> {_format_db(after)} dB")
    if convergence_csv:
        lines = ["iteration,objective,primal_residual"]
        for i, (obj, res) in enumerate(
            zip(state.objective_history, state.residual_history)
        ):
            lines.append(f"{i},{obj!r},{res!r}")
        Path(convergence_csv).write_text("\n".join(lines) + "\n")
        click.echo(f"wrote {convergence_csv}")


@cli.command("denoise-sweep")
@click.argument("input_wav", type=click.Path())
@click.argument("clean_wav", type=click.Path())
@click.option("--lam-min", default=1e-3, show_default=True)
@click.option("--lam-max", default=1e3, show_default=True)
@click.option("--lam-count", default=13, show_default=True)
@click.option("--rho", default=1.0, show_default=True)
@click.option("--iters", default=100, show_default=True)
@click.option("--window-len", default=4096, show_default=True)
@click.option("--shift-div", default=4, show_default=True)
@click.option("--if-oracle", "oracle_wav", type=click.Path(), default=None)
@click.option("-o", "--output", default="sweep.csv", show_default=True)
@click.option("--best-wav", default=None, help="Write the best-SNR output here.")
@click.pass_context
def cmd_denoise_sweep(ctx, input_wav, clean_wav, lam_min, lam_max, lam_count,
                      rho, iters, window_len, shift_div, oracle_wav, output,
                      best_wav):
    """Regularization sweep on a log grid, scored against a clean reference."""
    p = _with_config(ctx, lam_min=lam_min, lam_max=lam_max, lam_count=lam_count,
                     rho=rho, iters=iters, window_len=window_len,
                     shift_div=shift_div)
    _require_file(input_wav)
    _require_file(clean_wav)
    if oracle_wav:
        _require_file(oracle_wav)
    if p["lam_count"] < 1 or not 0 < p["lam_min"] <= p["lam_max"]:
        raise click.UsageError("need 0 < lam-min <= lam-max and lam-count >= 1")
    observed = read_wav(input_wav)
    clean = read_wav(clean_wav)
    if len(clean) != len(observed):
        raise click.UsageError("clean WAV length must match the input")
    config = _stft_config(p["window_len"], p["shift_div"], tight=True)
    grid = list(np.geomspace(p["lam_min"], p["lam_max"], p["lam_count"]))
    params = AdmmParams(lam=grid[0], rho=p["rho"], max_iter=p["iters"])
    if_map = estimate_if_for(read_wav(oracle_wav) if oracle_wav else observed, config)
    rows = lambda_sweep(observed, clean, grid, params, config, if_map=if_map)
    lines = ["lam,snr_db,objective"]
    for row in rows:
        lines.append(f"{row.lam!r},{row.snr_db!r},{row.objective!r}")
    Path(output).write_text("\n".join(lines) + "\n")
    best = max(rows, key=lambda r: r.snr_db)
    click.echo(f"input SNR {_format_db(snr_db(clean, observed))} dB; "
               f"best lam={best.lam:.6g} -> {_format_db(best.snr_db)} dB")
    click.echo(f"wrote {output}")
    if best_wav:
        params = AdmmParams(lam=best.lam, rho=p["rho"], max_iter=p["iters"])
        result, _ = denoise(observed, params, config, if_map=if_map)
        write_wav(result, best_wav, format="float32")
        click.echo(f"wrote {best_wav}")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False, prog_name="ipclr")
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except (NumericalError, FloatingPointError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2
    return 0


def entry():  # pragma: no cover - thin wrapper for the console script
    sys.exit(main())
