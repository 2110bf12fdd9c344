#!/usr/bin/env python3
"""
Example script demonstrating the Feedback Lab.

This script shows how to:
1. Load an experiment configuration
2. Compute the finite-horizon rate chain and the steady-state report
3. Compare the recursive scheme with the Kalman-filter scheme
4. Trace the power/rate trade-off and run a short Monte Carlo sweep

Run this script from the repository root.
"""

import math
import sys
from pathlib import Path

import numpy as np

# Add src to Python path so we can import our modules
sys.path.insert(0, str(Path(__file__).parent / "src"))

from feedback_lab.channel.spec import awgn
from feedback_lab.coding import EncoderSpec, control_system, monte_carlo_error_rate, sk_transmit
from feedback_lab.config.settings import ExperimentConfig
from feedback_lab.errors import FeedbackLabError
from feedback_lab.limits import finite_report, steady_report, tradeoff_curve
from feedback_lab.utils.logging import setup_logging


def main():
    """Main example function."""
    print("🚀 Feedback Lab - Example Run")
    print("=" * 60)

    log_file = Path("logs") / "example_run.log"
    logger = setup_logging(log_level="WARNING", log_file=log_file)

    try:
        config_path = Path("config/arma1.yaml")
        print(f"📝 Loading configuration from {config_path}")
        if not config_path.exists():
            print("❌ Configuration file not found!")
            print("💡 Run the following command to create one:")
            print("   python run_cli.py init")
            return 1
        config = ExperimentConfig.from_file(config_path)
        channel = config.channel.to_spec()
        encoder = config.encoder.to_spec()
        print(f"✅ Channel order m={channel.m}, encoder dimension n+1={encoder.dim}")

        print(f"\n📊 Finite-horizon rate chain (T={config.horizon}):")
        report = finite_report(encoder, channel, config.horizon)
        for name, rate in report.rates.items():
            print(f"   • {name:14s} {rate:.12f} nats/use")
        print(f"   • max relative residual {report.max_relative_residual():.2e}")
        print(f"   • power {report.power_analytic:.8f} (PMMSE trace {report.pmmse_trace:.8f})")

        print("\n📈 Steady state:")
        steady = steady_report(encoder, channel)
        print(f"   • (1/2) log K_e = {steady.rates['rate_innov']:.10f}")
        print(f"   • log DI(A)     = {steady.rates['rate_di']:.10f}")
        print(f"   • all-pass flatness {steady.extras['allpass_flatness']:.2e}")

        print("\n🔁 Recursive scheme against the Kalman-filter scheme (a=2, T=100):")
        a, T = 2.0, 100
        g = math.sqrt(a * a - 1.0)
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, T]))
        x0 = float(rng.uniform(-0.5, 0.5))
        noise = rng.standard_normal(T + 1)
        sk = sk_transmit(a, g, x0, noise, T)
        kf = control_system(EncoderSpec.scalar(a, -g), awgn(), [x0], noise, T)
        print(f"   • max |u_SK - u_KF| = {np.max(np.abs(sk.u - kf.u)):.2e}")
        print(f"   • max |xhat0_SK - xhat0_KF| = {np.max(np.abs(sk.xhat0_path - kf.xhat0_path)):.2e}")

        print("\n⚖️  Power/rate trade-off over the channel:")
        encoders = [EncoderSpec.scalar(a, 1.0) for a in (1.2, 1.5, 2.0, 3.0)]
        for row in tradeoff_curve(channel, config.horizon, encoders):
            print(f"   • power {row['power']:.4f} -> rate {row['rate']:.6f} nats/use")

        print("\n🎲 Monte Carlo (P=3, eps=0.2, 2000 trials):")
        for row in monte_carlo_error_rate(None, 3.0, 0.2, [10, 20], 2000, config.seed):
            print(f"   • T={row.T:3d} M_T={row.M_T:8d} Pe={row.Pe:.4f} power={row.power_hat:.4f}")

        print("\n🎉 Example run completed!")
        print("\n📖 Next steps:")
        print("1. Run: python run_cli.py init")
        print("2. Run: python run_cli.py limits --config config/arma1.yaml")
        print("3. Run: python run_cli.py verify")

    except FeedbackLabError as e:
        print(f"❌ Error during example run: {e}")
        logger.exception("Example run failed")
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())
