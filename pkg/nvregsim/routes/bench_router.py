"""
Benchmarking commands
``bench repetitive|rb|rb1q|fidelity`` and ``ablate errors``.  All of them run
at the reduced desk step density unless a density is given.
"""
import logging

import numpy as np

from nvregsim.core.errors import BenchmarkingError
from nvregsim.core.routing import CommandContext, CommandResult, CommandRouter
from nvregsim.schemas.experiment_schema import (
    AblationExperiment,
    FidelityExperiment,
    Rb1qExperiment,
    RbExperiment,
    RepetitiveExperiment,
)
from nvregsim.schemas.report_schema import TableSpec
from nvregsim.simulation.benchmarking import (
    ABLATION_TOGGLES,
    REPETITIVE_INPUT_STATES,
    IdealQubitBackend,
    PulseLevelBackend,
    RbResult,
    epc_t2_limit,
    error_ablation,
    extract_epg2q,
    gate_fidelity_projection,
    mean_single_qubit_length,
    repetitive_benchmark,
    run_randomized_benchmarking,
    single_qubit_epc,
)
from nvregsim.simulation.propagation import NS_PER_US

logger = logging.getLogger(__name__)

bench_router = CommandRouter()
ablate_router = CommandRouter()

CONTRIBUTIONS = (
    "crosstalk_leakage",
    "unpolarized_nitrogen",
    "misaligned_field",
    "hyperfine_total",
    "all_coherent",
    "decoherence",
    "residual",
)


def _pulse_backend(ctx: CommandContext) -> PulseLevelBackend:
    cfg = ctx.config
    return PulseLevelBackend(
        model=ctx.register(),
        tau1=cfg.pulses.tau1_ns,
        n_pi=cfg.pulses.n_pi,
        style=ctx.style(),
        options=ctx.options(),
        f_init=cfg.model.f_init,
        nuclear=cfg.model.nuclear,
    )


def _survival_table(name: str, description: str, result: RbResult) -> TableSpec:
    rows = [
        [int(length), k, float(result.survival[i, k])]
        for i, length in enumerate(result.lengths)
        for k in range(result.survival.shape[1])
    ]
    return TableSpec(name=name, description=description, columns=["n_cliff", "sample", "survival"], rows=rows)


@bench_router.command("repetitive", help="repeated sqrt(ZZ) gates on product input states", desk_density=True)
def bench_repetitive(request, ctx: CommandContext) -> CommandResult:
    cfg = ctx.config
    block = cfg.block(RepetitiveExperiment)
    model = ctx.register()
    options = ctx.options()
    mixture = cfg.model.mixture() if block.use_mixture else None
    states = [tuple(s) for s in (block.input_states or REPETITIVE_INPUT_STATES)]
    n_list = list(range(block.n_max + 1))

    runs = [
        repetitive_benchmark(
            model, state, n_list, mixture, block.reverse, cfg.pulses.tau1_ns, cfg.pulses.n_pi,
            ctx.style(), options, cfg.model.f_init, cfg.model.t2_us,
        )
        for state in states
    ]
    pepg = [r.record.pepg for r in runs if r.record is not None and not r.record.p_out_of_range]
    results = {
        "states": [r.to_dict() for r in runs],
        "mean_pepg": float(np.mean(pepg)) if pepg else None,
        "std_pepg": float(np.std(pepg)) if pepg else None,
        "charge_mixture": list(cfg.model.charge_weights) if mixture is not None else None,
    }
    rows = [[r.input_state[0], r.input_state[1], int(n), float(s)] for r in runs for n, s in zip(r.n, r.signal)]
    table = TableSpec(
        name="decays",
        description="polarization after n sqrt(ZZ) gates",
        columns=["state_nv1", "state_nv2", "n", "signal"],
        rows=rows,
    )
    return CommandResult(results, [table], frame=options.frame)


@bench_router.command("rb", help="two-qubit Clifford randomized benchmarking", desk_density=True)
def bench_rb(request, ctx: CommandContext) -> CommandResult:
    cfg = ctx.config
    block = cfg.block(RbExperiment)
    if block.backend == "ideal":
        backend, frame = IdealQubitBackend(block.depolarizing), None
    else:
        backend = _pulse_backend(ctx)
        frame = backend.options.frame

    result = run_randomized_benchmarking(backend, block.lengths, block.n_random, ctx.seed, workers=ctx.workers)
    if result.record is None:
        raise BenchmarkingError("randomized benchmarking needs at least 4 sequence lengths for the decay fit")
    counts = result.counts
    results = {
        "backend": block.backend,
        "rb": result.to_dict(),
        "epc": result.record.epc,
        "epc_sigma": result.record.epc_sigma,
        "mean_duration_us": float(result.durations.mean()) if result.durations.size else 0.0,
    }
    tables = [_survival_table("survival", "two-qubit RB survival per random sequence", result)]

    if block.backend == "pulse":
        epc_t2 = epc_t2_limit(
            mean_single_qubit_length(backend.style),
            backend.n_pi * backend.tau1 / NS_PER_US,
            counts.single_qubit,
            counts.two_qubit,
            *cfg.model.t2_us,
        )
        results["epc_t2"] = epc_t2
        results["epc_over_epc_t2"] = result.record.epc / epc_t2 if epc_t2 > 0 else None

    epc_1q = block.epc_1q
    if epc_1q is None and block.single_qubit != "skip":
        single = single_qubit_epc(
            backend, block.single_qubit, block.lengths, block.n_random, ctx.seed, workers=ctx.workers
        )
        epc_1q = single.epc
        results["single_qubit"] = single.to_dict()
        tables.append(_survival_table("survival_1q", f"single-qubit RB survival ({block.single_qubit})", single.result))
    if epc_1q is not None:
        results["epc_1q"] = epc_1q
        try:
            results["epg_2q"] = extract_epg2q(result.record.epc, epc_1q, counts.two_qubit)
        except BenchmarkingError as exc:
            logger.warning("EPG2q not extracted: %s", exc)
            results["epg_2q"] = None
    return CommandResult(results, tables, frame=frame)


@bench_router.command("rb1q", help="single-qubit error per Clifford (bare or stripped)", desk_density=True)
def bench_rb1q(request, ctx: CommandContext) -> CommandResult:
    block = ctx.config.block(Rb1qExperiment)
    backend = _pulse_backend(ctx)
    single = single_qubit_epc(
        backend, block.mode, block.lengths, block.n_random, ctx.seed, block.target, ctx.workers
    )
    table = _survival_table("survival", f"single-qubit RB survival ({block.mode})", single.result)
    return CommandResult(single.to_dict(), [table], frame=backend.options.frame)


@bench_router.command("fidelity", help="average sqrt(ZZ) gate fidelity against Rabi frequency", desk_density=True)
def bench_fidelity(request, ctx: CommandContext) -> CommandResult:
    cfg = ctx.config
    block = cfg.block(FidelityExperiment)
    options = ctx.options()
    points = gate_fidelity_projection(
        ctx.register(), block.rabi_mhz, cfg.pulses.tau1_ns, cfg.pulses.n_pi, cfg.pulses.envelope,
        options, cfg.model.nuclear, cfg.model.t2_us, ctx.workers,
    )
    table = TableSpec(
        name="fidelity",
        description="coherent and T2-limited sqrt(ZZ) fidelity",
        columns=["rabi_mhz", "f_coherent", "epg_t2", "f_total"],
        rows=[[p.rabi, p.coherent, p.epg_t2, p.total] for p in points],
    )
    return CommandResult({"points": [p.to_dict() for p in points]}, [table], frame=options.frame)


@ablate_router.command("errors", help="relative error contributions by switching error sources off", desk_density=True)
def ablate_errors(request, ctx: CommandContext) -> CommandResult:
    cfg = ctx.config
    block = cfg.block(AblationExperiment)
    base = _pulse_backend(ctx)
    report = error_ablation(
        base, block.rabi_mhz, block.n_cliff, block.n_random, ctx.seed,
        (block.spam_a, block.spam_y0), block.spam_scale, cfg.model.t2_us, ctx.workers,
    )
    columns = ["rabi_mhz", "delta_full", "epc_t2", "flagged"]
    columns += [f"z_{t}" for t in ABLATION_TOGGLES] + list(CONTRIBUTIONS)
    rows = [
        [p.rabi, p.delta_full, p.epc_t2, p.flagged]
        + [p.z_sim[t] for t in ABLATION_TOGGLES]
        + [p.contributions.get(c) for c in CONTRIBUTIONS]
        for p in report.points
    ]
    table = TableSpec(name="contributions", description="error-source attribution per Rabi frequency", columns=columns, rows=rows)
    return CommandResult(report.to_dict(), [table], frame=base.options.frame)
