#!/usr/bin/env python3
"""Independent crossover-backtest oracle.

Recomputes the (short, long) crossover backtest for a fixture CSV from first
principles (naive window means, explicit state machine) and prints every
metric and both equity curves at full precision. Used to verify the committed
golden report before freezing it; shares no code with the toolkit.
"""
import csv
import statistics
import sys
from pathlib import Path


def load(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            fields = [row["Open"], row["High"], row["Low"], row["Close"],
                      row["Adj Close"], row["Volume"]]
            if any(f.strip().lower() in ("", "null") for f in fields):
                continue
            rows.append((row["Date"], float(row["Adj Close"])))
    rows.sort()
    return rows


def sma(values, n):
    return [sum(values[i - n + 1:i + 1]) / n for i in range(n - 1, len(values))]


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else str(
        Path(__file__).resolve().parent.parent / "tests/fixtures/prices/CROSS.csv")
    short_n = int(sys.argv[2]) if len(sys.argv) > 2 else 5
    long_n = int(sys.argv[3]) if len(sys.argv) > 3 else 10

    rows = load(path)
    dates = [d for d, _ in rows]
    adj = [a for _, a in rows]

    short_sma = sma(adj, short_n)[long_n - short_n:]
    long_sma = sma(adj, long_n)
    assert len(short_sma) == len(long_sma)

    signs = []
    for i, (s, l) in enumerate(zip(short_sma, long_sma)):
        d = s - l
        if d > 0:
            signs.append(1)
        elif d < 0:
            signs.append(-1)
        else:
            signs.append(signs[i - 1] if i else 0)

    offset = long_n - 1
    cont = [adj[offset]]
    ind = [adj[offset]]
    bought = signs[0] > 0
    trades = []
    for i in range(1, len(signs)):
        delta = adj[offset + i] - adj[offset + i - 1]
        cont.append(cont[-1] + delta)
        ind.append(ind[-1] + (delta if bought else 0.0))
        buy = signs[i - 1] < 0 and signs[i] > 0
        sell = signs[i - 1] > 0 and signs[i] < 0
        if sell and bought:
            trades.append(("Sell", dates[offset + i]))
        if buy and not bought:
            trades.append(("Buy", dates[offset + i]))
        if sell:
            bought = False
        elif buy:
            bought = True

    n = len(cont)
    outperf = 100.0 * sum(1 for a, b in zip(ind, cont) if a > b) / n
    ratio = statistics.stdev(ind) / statistics.stdev(cont)

    print(f"bars: {len(adj)}  window: {n}  first: {dates[offset]}  last: {dates[-1]}")
    print(f"trades: {trades}")
    print(f"continuous_final: {cont[-1]!r}")
    print(f"indicative_final: {ind[-1]!r}")
    print(f"outperformance_pct: {outperf!r}")
    print(f"volatility_ratio: {ratio!r}")
    print("curve_date,continuous,indicative")
    for i in range(n):
        print(f"{dates[offset + i]},{cont[i]!r},{ind[i]!r}")


if __name__ == "__main__":
    main()
