"""Command-line front end for claims files, plot data and simulations.

Input CSV schema: header ``z,status[,beta][,ultimate][,cohort]`` with
``status`` 1 for closed (fully observed) and 0 for open (right-censored)
claims.  ``beta`` is the per-claim expert tail index (required on open
claims unless a global ``--beta`` is passed), ``ultimate`` the expert's
projected eventual size of an open claim (closed claims default to their
paid amount), and ``cohort`` an arrival-period label for validation splits.

Exit codes: 0 success, 2 input or schema error, 3 estimation-domain error
(for example no uncensored exceedance at the requested threshold).

Quantile outputs are exceedance levels among reported claims only; no
correction for late-reported (IBNR) claims is applied, so interpret
levels for recent cohorts with care.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bayes import (
    PosteriorIntervalError,
    bayes_gamma_estimator,
    bayes_mdi_estimator,
    moment_match,
)
from .core import (
    CensoredSample,
    DegenerateEstimateError,
    EstimatorKind,
    MissingBetaError,
    QuantileOutOfReachError,
    TailEstimate,
)
from .distributions import BurrDist, FrechetDist, ParetoDist
from .estimators import (
    classic_hill_curve,
    expert_means,
    flipped_estimator,
    hill_censored,
    hill_censored_curve,
    p_hat_curve,
    perturbed_curve,
    perturbed_estimator,
    squared_penalty_estimator,
)
from .simulation import StudyConfig, run_study
from .survival import kaplan_meier


class SchemaError(ValueError):
    """Input file or flag combination violates the claims-file contract."""


@dataclass(frozen=True)
class ClaimsData:
    """Parsed claims file; optional columns hold nan where absent."""

    z: np.ndarray
    status: np.ndarray
    beta: np.ndarray
    ultimate: np.ndarray
    cohort: np.ndarray
    has_beta: bool
    has_ultimate: bool
    has_cohort: bool

    @property
    def n(self) -> int:
        return self.z.size

    def sample(self) -> CensoredSample:
        return CensoredSample.from_arrays(self.z, self.status, self.beta)

    def ultimates_series(self) -> np.ndarray:
        """Ultimate for open claims, paid amount for closed ones."""
        return np.where(np.isnan(self.ultimate), self.z, self.ultimate)

    def require_betas(self, fallback: Optional[float]) -> None:
        """Every open claim must resolve a beta; reports the first bad row."""
        if fallback is not None:
            return
        bad = np.nonzero((self.status == 0) & np.isnan(self.beta))[0]
        if bad.size:
            raise SchemaError(
                f"row {bad[0] + 1}: open claim has no beta and no --beta was given"
            )

    def subset(self, mask: np.ndarray) -> "ClaimsData":
        return ClaimsData(
            z=self.z[mask],
            status=self.status[mask],
            beta=self.beta[mask],
            ultimate=self.ultimate[mask],
            cohort=self.cohort[mask],
            has_beta=self.has_beta,
            has_ultimate=self.has_ultimate,
            has_cohort=self.has_cohort,
        )


def _parse_positive(text: str, row: int, col: str, allow_empty: bool) -> float:
    if text is None or text.strip() == "":
        if allow_empty:
            return float("nan")
        raise SchemaError(f"row {row}: missing value for '{col}'")
    try:
        value = float(text)
    except ValueError:
        raise SchemaError(f"row {row}: '{col}' is not a number: {text!r}") from None
    if not value > 0:
        raise SchemaError(f"row {row}: '{col}' must be positive, got {text}")
    return value


def read_claims(path: str) -> ClaimsData:
    """Parse and validate a claims CSV (see module docstring for schema)."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot open input file: {exc}") from None
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError("input file is empty (header required)")
        cols = [c.strip() for c in reader.fieldnames]
        for required in ("z", "status"):
            if required not in cols:
                raise SchemaError(f"missing required column '{required}'")
        has_beta = "beta" in cols
        has_ultimate = "ultimate" in cols
        has_cohort = "cohort" in cols
        z, status, beta, ultimate, cohort = [], [], [], [], []
        for i, row in enumerate(reader, start=1):
            z.append(_parse_positive(row.get("z"), i, "z", allow_empty=False))
            s = (row.get("status") or "").strip()
            if s not in ("0", "1"):
                raise SchemaError(f"row {i}: 'status' must be 0 or 1, got {s!r}")
            status.append(float(s))
            beta.append(
                _parse_positive(row.get("beta"), i, "beta", allow_empty=True)
                if has_beta
                else float("nan")
            )
            ultimate.append(
                _parse_positive(row.get("ultimate"), i, "ultimate", allow_empty=True)
                if has_ultimate
                else float("nan")
            )
            if has_cohort:
                c = (row.get("cohort") or "").strip()
                if c == "":
                    raise SchemaError(f"row {i}: missing value for 'cohort'")
                try:
                    cohort.append(float(c))
                except ValueError:
                    raise SchemaError(f"row {i}: 'cohort' is not a number: {c!r}") from None
            else:
                cohort.append(float("nan"))
    if not z:
        raise SchemaError("input file has no data rows")
    return ClaimsData(
        z=np.array(z),
        status=np.array(status),
        beta=np.array(beta),
        ultimate=np.array(ultimate),
        cohort=np.array(cohort),
        has_beta=has_beta,
        has_ultimate=has_ultimate,
        has_cohort=has_cohort,
    )


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    return "" if not np.isfinite(value) else repr(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _k_range(args, n: int) -> np.ndarray:
    kmax = args.kmax if args.kmax is not None else n - 1
    if not 1 <= args.kmin <= kmax <= n - 1:
        raise SchemaError(f"need 1 <= kmin <= kmax <= {n - 1}, got [{args.kmin}, {kmax}]")
    return np.arange(args.kmin, kmax + 1)


# -- estimate ---------------------------------------------------------------

_ESTIMATORS = (
    "mle",
    "perturbed",
    "flipped",
    "squared",
    "bayes-gamma",
    "bayes-mdi",
    "expert-am",
    "expert-hm",
)


def cmd_estimate(args) -> int:
    claims = read_claims(args.input)
    sample = claims.sample()
    name = args.estimator
    if name in ("expert-am", "expert-hm"):
        claims.require_betas(args.beta)
        am, hm = expert_means(sample, beta=args.beta)
        value = am if name == "expert-am" else hm
        kind = EstimatorKind.EXPERT_AM if name == "expert-am" else EstimatorKind.EXPERT_HM
        est = TailEstimate(
            alpha_hat=value,
            kind=kind,
            k=sample.n,
            lam=0.0,
            p_hat=float(sample.epsilon.mean()),
        )
    else:
        if args.k is None:
            raise SchemaError(f"--k is required for estimator '{name}'")
        if not 1 <= args.k <= sample.n - 1:
            raise SchemaError(f"--k must be in [1, {sample.n - 1}], got {args.k}")
        if name == "mle":
            est = hill_censored(sample, args.k)
        elif name == "perturbed":
            if args.lam > 0:
                claims.require_betas(args.beta)
            est = perturbed_estimator(sample, args.k, args.lam, beta=args.beta)
        elif name == "flipped":
            if args.lam > 0:
                claims.require_betas(args.beta)
            est = flipped_estimator(sample, args.k, args.lam, beta=args.beta)
        elif name == "squared":
            if args.lam > 0:
                claims.require_betas(args.beta)
            est = squared_penalty_estimator(sample, args.k, args.lam, beta=args.beta)
        elif name == "bayes-gamma":
            if args.beta is None:
                raise SchemaError("bayes-gamma requires --beta (prior mean)")
            est = bayes_gamma_estimator(sample, args.k, moment_match(args.beta, args.bg_sigma2))
        else:
            est = bayes_mdi_estimator(sample, args.k)
    report = {
        "alpha_hat": est.alpha_hat,
        "xi_hat": est.xi_hat,
        "p_hat": est.p_hat,
        "k": est.k,
        "kind": est.kind.value,
        "lambda": est.lam,
    }
    print(json.dumps(report))
    return 0


# -- hillplot ---------------------------------------------------------------


def _hillplot_table(claims: ClaimsData, ks: np.ndarray, lam: float, beta):
    sample = claims.sample()
    if lam > 0:
        claims.require_betas(beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi_mle = 1.0 / hill_censored_curve(sample, ks)
        xi_pert = 1.0 / perturbed_curve(sample, lam, beta=beta, ks=ks)
    header = ["k", "xi_mle", "xi_perturbed", "p_hat"]
    cols = [ks, xi_mle, xi_pert, p_hat_curve(sample, ks)]
    if claims.has_ultimate:
        header.append("xi_ultimates")
        cols.append(classic_hill_curve(claims.ultimates_series(), ks))
    return header, list(zip(*cols))


def cmd_hillplot(args) -> int:
    claims = read_claims(args.input)
    ks = _k_range(args, claims.n)
    header, rows = _hillplot_table(claims, ks, args.lam, args.beta)
    _write_csv(args.out, header, rows)
    return 0


# -- quantile ---------------------------------------------------------------


def cmd_quantile(args) -> int:
    claims = read_claims(args.input)
    if args.beta is None:
        raise SchemaError("quantile requires --beta (expert tail index)")
    if not 0 < args.p < 1:
        raise SchemaError(f"--p must be in (0, 1), got {args.p}")
    sample = claims.sample()
    n = claims.n
    ks = _k_range(args, n)
    factor = ks / (n * args.p)
    km = kaplan_meier(sample)
    levels = 1.0 - ks / n
    km_anchor = km.quantile_batch(levels)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi_mle = 1.0 / hill_censored_curve(sample, ks)
        q_km = km_anchor * factor**xi_mle
        header = ["k", "q_km"]
        cols = [ks, q_km]
        if claims.has_ultimate:
            ults = claims.ultimates_series()
            ult_curve = kaplan_meier(CensoredSample.from_arrays(ults, np.ones_like(ults)))
            ult_anchor = ult_curve.quantile_batch(levels)
            xi_ult = classic_hill_curve(ults, ks)
            header.append("q_ultimates")
            cols.append(ult_anchor * factor**xi_ult)
            ex_anchor = ult_anchor
        else:
            ex_anchor = km_anchor
        ph = p_hat_curve(sample, ks)
        mle_branch = km_anchor * factor**xi_mle
        ex_branch = ex_anchor * factor ** (1.0 / args.beta)
        # nan**0 == 1, so a degenerate branch drops out when its weight is 0
        q_combined = mle_branch**ph * ex_branch ** (1.0 - ph)
    header.append("q_combined")
    cols.append(q_combined)
    _write_csv(args.out, header, list(zip(*cols)))
    return 0


# -- simulate ---------------------------------------------------------------


def _dist_from_args(args):
    if args.dist == "pareto":
        if (args.xi is None) == (args.alpha is None):
            raise SchemaError("pareto needs exactly one of --xi or --alpha")
        alpha = args.alpha if args.alpha is not None else 1.0 / args.xi
        return ParetoDist(alpha=alpha, x0=args.x0)
    if args.dist == "frechet":
        if (args.xi is None) == (args.alpha is None):
            raise SchemaError("frechet needs exactly one of --xi or --alpha")
        alpha = args.alpha if args.alpha is not None else 1.0 / args.xi
        return FrechetDist(alpha=alpha)
    if None in (args.eta, args.lam_burr, args.tau):
        raise SchemaError("burr needs --eta, --lam and --tau")
    return BurrDist(eta=args.eta, lam=args.lam_burr, tau=args.tau)


def cmd_simulate(args) -> int:
    dist = _dist_from_args(args)
    kmax = args.kmax if args.kmax is not None else min(150, args.n - 1)
    config = StudyConfig(
        dist_x=dist,
        dist_l=dist,
        n=args.n,
        n_sim=args.nsim,
        k_grid=range(args.kmin, kmax + 1),
        p=args.p,
        expert_noise_sd=args.expert_sd,
        bg_sigma2=args.bg_sigma2,
        lam=args.lam,
        seed=args.seed,
    )
    result = run_study(config)
    result.to_csv(args.out)
    return 0


# -- split-validate ---------------------------------------------------------


def cmd_split_validate(args) -> int:
    claims = read_claims(args.input)
    if not claims.has_cohort:
        raise SchemaError("missing 'cohort' column")
    reduced_mask = claims.cohort <= args.cutoff
    if not reduced_mask.any():
        raise DegenerateEstimateError(f"no claims with cohort <= {args.cutoff}")
    for suffix, data in (("full", claims), ("reduced", claims.subset(reduced_mask))):
        if data.n < 2:
            raise DegenerateEstimateError(f"{suffix} dataset too small")
        kmax = args.kmax if args.kmax is not None else data.n - 1
        kmax = min(kmax, data.n - 1)
        if args.kmin > kmax:
            raise SchemaError(f"kmin {args.kmin} exceeds usable kmax {kmax} for {suffix} data")
        ks = np.arange(args.kmin, kmax + 1)
        header, rows = _hillplot_table(data, ks, args.lam, args.beta)
        _write_csv(f"{args.out}_{suffix}.csv", header, rows)
    return 0


# -- synth ------------------------------------------------------------------


def cmd_synth(args) -> int:
    if not 0 < args.censoring < 1:
        raise SchemaError("--censoring must be in (0, 1)")
    if not args.xi > 0:
        raise SchemaError("--xi must be positive")
    rng = np.random.default_rng(args.seed)
    alpha = 1.0 / args.xi
    # early cohort (0) is mostly settled, late cohort (1) mostly open; the
    # average matches the requested overall censoring fraction
    fractions = (0.5 * args.censoring, min(0.95, 1.5 * args.censoring))
    rows = []
    for cohort, frac in enumerate(fractions):
        n_c = args.n // 2 if cohort == 0 else args.n - args.n // 2
        alpha2 = alpha * frac / (1.0 - frac)
        x = ParetoDist(alpha=alpha).sample(n_c, rng)
        censor_at = ParetoDist(alpha=alpha2).sample(n_c, rng)
        z = np.minimum(x, censor_at)
        status = (x <= censor_at).astype(int)
        uplift = np.exp(rng.normal(-0.01, 0.05, n_c))
        for i in range(n_c):
            ultimate = "" if status[i] == 1 else repr(float(x[i] * uplift[i]))
            rows.append([repr(float(z[i])), str(status[i]), ultimate, str(cohort)])
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z", "status", "ultimate", "cohort"])
        writer.writerows(rows)
    return 0


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailbridge",
        description=(
            "Pareto tail-index and extreme-quantile estimation for right-"
            "censored claims with expert tail opinions."
        ),
        epilog=(
            "Quantiles are estimated among reported claims; late-reported "
            "(IBNR) claims are not corrected for."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, beta_help):
        p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                       help="penalization weight (default 1)")
        p.add_argument("--beta", type=float, default=None, help=beta_help)

    p = sub.add_parser("estimate", help="one tail-index estimate as JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=None, help="number of top order statistics")
    p.add_argument("--estimator", required=True, choices=_ESTIMATORS)
    add_common(p, "global expert tail index (fallback for missing beta cells)")
    p.add_argument("--bg-sigma2", type=float, default=0.04,
                   help="prior variance for bayes-gamma moment matching (default 0.04)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("hillplot", help="tail-index curves vs k as CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--kmin", type=int, default=5)
    p.add_argument("--kmax", type=int, default=None)
    add_common(p, "global expert tail index (fallback for missing beta cells)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hillplot)

    p = sub.add_parser("quantile", help="extreme quantile curves vs k as CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--p", type=float, default=0.005,
                   help="exceedance probability (default 0.005)")
    p.add_argument("--kmin", type=int, default=5)
    p.add_argument("--kmax", type=int, default=None)
    add_common(p, "expert tail index for the combined curve (required)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_quantile)

    p = sub.add_parser("simulate", help="Monte Carlo bias/MSE study as CSV")
    p.add_argument("--dist", required=True, choices=("pareto", "burr", "frechet"))
    p.add_argument("--xi", type=float, default=None, help="extreme value index 1/alpha")
    p.add_argument("--alpha", type=float, default=None, help="tail index")
    p.add_argument("--x0", type=float, default=1.0, help="pareto scale (default 1)")
    p.add_argument("--eta", type=float, default=None, help="burr eta")
    p.add_argument("--lam", dest="lam_burr", type=float, default=None, help="burr lambda")
    p.add_argument("--tau", type=float, default=None, help="burr tau")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--nsim", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, default=0.005)
    p.add_argument("--expert-sd", type=float, default=0.2)
    p.add_argument("--bg-sigma2", type=float, default=0.04)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--kmin", type=int, default=5)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("split-validate",
                       help="hillplot CSVs for the full data and an early cohort")
    p.add_argument("--input", required=True)
    p.add_argument("--cutoff", type=float, required=True,
                   help="claims with cohort <= cutoff form the reduced dataset")
    p.add_argument("--kmin", type=int, default=5)
    p.add_argument("--kmax", type=int, default=None)
    add_common(p, "global expert tail index (fallback for missing beta cells)")
    p.add_argument("--out", required=True, help="output prefix (writes <out>_full.csv and <out>_reduced.csv)")
    p.set_defaults(func=cmd_split_validate)

    p = sub.add_parser("synth", help="generate a schema-conformant synthetic portfolio")
    p.add_argument("--n", type=int, default=800)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--xi", type=float, default=0.5)
    p.add_argument("--censoring", type=float, default=0.6,
                   help="overall censored fraction target (default 0.6)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, MissingBetaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateEstimateError, QuantileOutOfReachError, PosteriorIntervalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
