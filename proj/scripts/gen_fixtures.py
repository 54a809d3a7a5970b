#!/usr/bin/env python3
"""Generates the committed price fixtures.

Deterministic by construction; rerunning reproduces the committed files
byte-for-byte. CROSS is a small oscillating series for the golden crossover
report; FIXA/FIXB/FIXC are five-year upward-drifting walks with differing
drift and volatility for the grid tests.
"""
import math
import random
from datetime import date, timedelta
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "prices"

HEADER = "Date,Open,High,Low,Close,Adj Close,Volume\n"


def weekdays(start, count):
    days = []
    d = start
    while len(days) < count:
        if d.weekday() < 5:
            days.append(d)
        d += timedelta(days=1)
    return days


def emit(path, dates, closes, null_indices, rng, adj_factor=0.98):
    assert len(dates) == len(closes)
    rows = [HEADER]
    prev_close = closes[0]
    for i, (d, c) in enumerate(zip(dates, closes)):
        if i in null_indices:
            rows.append(f"{d.isoformat()},null,null,null,null,null,null\n")
            continue
        spread = abs(rng.gauss(0, 0.006)) + 0.001
        o = prev_close * (1 + rng.gauss(0, 0.004))
        hi = max(o, c) * (1 + spread)
        lo = min(o, c) * (1 - spread)
        vol = int(2_000_000 * (0.4 + rng.random()))
        adj = c * adj_factor
        rows.append(
            f"{d.isoformat()},{o:.6f},{hi:.6f},{lo:.6f},{c:.6f},{adj:.6f},{vol}\n"
        )
        prev_close = c
    path.write_text("".join(rows))
    valid = [i for i in range(len(dates)) if i not in null_indices]
    print(
        f"{path.name}: {len(dates)} rows, {len(valid)} bars, "
        f"{dates[0].isoformat()}..{dates[-1].isoformat()}"
    )


def regime_walk(rng, start_price, segments):
    closes = []
    price = start_price
    for days, drift, vol in segments:
        for _ in range(days):
            price *= 1 + rng.gauss(drift, vol)
            price = max(price, 0.5)
            closes.append(price)
    return closes


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    # Small oscillator: SMA(5) crosses SMA(10) repeatedly.
    rng = random.Random(2001)
    cross_dates = weekdays(date(2020, 1, 2), 46)
    cross_closes = [
        100 + 9 * math.sin(2 * math.pi * i / 17) + rng.gauss(0, 0.35)
        for i in range(46)
    ]
    emit(OUT / "CROSS.csv", cross_dates, cross_closes, {21}, rng)

    five_years = weekdays(date(2015, 1, 2), 1262)
    nulls = {400, 900}

    rng = random.Random(3101)
    fixa = regime_walk(rng, 80.0, [(1262, 0.0008, 0.013)])
    emit(OUT / "FIXA.csv", five_years, fixa, nulls, rng)

    rng = random.Random(3202)
    fixb = regime_walk(rng, 45.0, [(1262, 0.0010, 0.018)])
    emit(OUT / "FIXB.csv", five_years, fixb, nulls, rng)

    rng = random.Random(3303)
    fixc = regime_walk(rng, 150.0, [(1262, 0.0006, 0.009)])
    emit(OUT / "FIXC.csv", five_years, fixc, nulls, rng)


if __name__ == "__main__":
    main()
