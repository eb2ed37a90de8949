"""Synthetic flight-price fixtures.

Two seeded generators produce CSV text with columns price, duration,
stops, class, days_left. The plain fixture has additive Gaussian noise
and a known slope difference between travel classes (economy 5 per hour,
business 0), the skewed fixture has multiplicative noise so that a
Gaussian fit leaves right-skewed residuals and a skewed family genuinely
fits better.
"""

from __future__ import annotations

import io

import numpy as np

from .data import Dataset, load_csv

ECONOMY_SLOPE = 5.0
BUSINESS_SLOPE = 0.0
NOISE_SD = 20.0

#: Mention phrases for this schema, used by variable resolution.
FLIGHT_SYNONYMS: dict[str, str] = {
    "ticket price": "price",
    "ticket": "price",
    "fare": "price",
    "expensive ticket": "price",
    "longer flight": "duration",
    "flight duration": "duration",
    "flight time": "duration",
    "flight length": "duration",
    "travel class": "class",
    "cabin class": "class",
    "layover stop": "stops",
    "layover stops": "stops",
    "number of layover stops": "stops",
    "layover": "stops",
    "stop": "stops",
    "days left": "days_left",
    "how far in advance": "days_left",
    "booking lead time": "days_left",
    "days before departure": "days_left",
}


def _csv_from_arrays(price, duration, stops, klass, days_left) -> str:
    buf = io.StringIO()
    buf.write("price,duration,stops,class,days_left\n")
    for p, d, s, k, dl in zip(price, duration, stops, klass, days_left):
        buf.write(f"{float(p)!r},{float(d)!r},{int(s)},{k},{int(dl)}\n")
    return buf.getvalue()


def flights_csv(n: int = 200, seed: int = 314) -> str:
    """Additive-noise fixture with a known class-dependent slope.

    price = 200 + 5 * duration (economy) or 450 + 0 * duration
    (business), stops and booking lead time shifted in, noise sd 20.
    """
    rng = np.random.default_rng(seed)
    duration = np.round(rng.uniform(1.0, 16.0, n), 3)
    klass = np.where(rng.random(n) < 0.5, "economy", "business")
    stops = rng.integers(0, 3, n)
    days_left = rng.integers(1, 61, n)
    base = np.where(klass == "economy", 200.0, 450.0)
    slope = np.where(klass == "economy", ECONOMY_SLOPE, BUSINESS_SLOPE)
    price = (
        base
        + slope * duration
        + 12.0 * stops
        - 0.8 * days_left
        + rng.normal(0.0, NOISE_SD, n)
    )
    price = np.round(price, 4)
    return _csv_from_arrays(price, duration, stops, klass, days_left)


def flights_skewed_csv(n: int = 300, seed: int = 2024) -> str:
    """Multiplicative-noise fixture for the family-refinement workflow.

    log(price) is linear in the covariates with Gaussian noise, so a
    Gaussian identity-link fit leaves right-skewed residuals while Gamma
    and log-normal fits capture the pattern.
    """
    rng = np.random.default_rng(seed)
    duration = np.round(rng.uniform(1.0, 16.0, n), 3)
    klass = np.where(rng.random(n) < 0.55, "economy", "business")
    stops = rng.integers(0, 3, n)
    days_left = rng.integers(1, 61, n)
    slope = np.where(klass == "economy", 0.10, 0.01)
    log_mu = (
        4.6
        + np.where(klass == "economy", 0.0, 1.0)
        + slope * duration
        + 0.05 * stops
        - 0.004 * days_left
    )
    price = np.round(np.exp(log_mu + rng.normal(0.0, 0.35, n)), 4)
    return _csv_from_arrays(price, duration, stops, klass, days_left)


def flights_dataset(n: int = 200, seed: int = 314) -> Dataset:
    return load_csv(flights_csv(n, seed), source_name=f"flights-{n}-{seed}")


def flights_skewed_dataset(n: int = 300, seed: int = 2024) -> Dataset:
    return load_csv(
        flights_skewed_csv(n, seed), source_name=f"flights-skewed-{n}-{seed}"
    )
