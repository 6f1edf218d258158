#!/usr/bin/env python3
"""Generate the bundled synthetic drive-cycle roster (CSV, 1 Hz).

Nine training cycles in three styles (urban / suburban / highway) plus one
low-speed held-out evaluation cycle. Deterministic.
"""
import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "cycles"


def make_cycle(rng, style, duration_s):
    if style == "urban":
        v_cruise, stop_p, a_max = (6.0, 14.0), 0.35, 1.8
    elif style == "suburban":
        v_cruise, stop_p, a_max = (12.0, 20.0), 0.18, 1.5
    else:  # highway
        v_cruise, stop_p, a_max = (22.0, 30.0), 0.04, 1.2

    v = 0.0
    speeds = [0.0]
    target = 0.0
    hold = 0
    while len(speeds) < duration_s:
        if hold <= 0:
            if rng.random() < stop_p:
                target = 0.0
                hold = rng.randint(5, 25)
            else:
                target = rng.uniform(*v_cruise)
                hold = rng.randint(10, 60)
        hold -= 1
        err = target - v
        a = max(-2.5, min(a_max, 0.35 * err + rng.gauss(0.0, 0.15)))
        v = max(0.0, v + a)
        speeds.append(round(v, 3))
    # end at rest
    while speeds[-1] > 0.05:
        speeds.append(round(max(0.0, speeds[-1] - 2.0), 3))
    return speeds


def write_cycle(name, speeds):
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / f"{name}.csv", "w") as f:
        f.write("t_s,v_mps\n")
        for t, v in enumerate(speeds):
            f.write(f"{t},{v}\n")
    print(name, len(speeds), "samples, max", max(speeds))


def main():
    rng = random.Random(20240901)
    roster = [
        ("urban_1", "urban", 560),
        ("urban_2", "urban", 620),
        ("urban_3", "urban", 500),
        ("suburban_1", "suburban", 580),
        ("suburban_2", "suburban", 640),
        ("suburban_3", "suburban", 520),
        ("highway_1", "highway", 600),
        ("highway_2", "highway", 660),
        ("highway_3", "highway", 540),
    ]
    for name, style, dur in roster:
        write_cycle(name, make_cycle(rng, style, dur))
    # held-out low-speed city profile
    write_cycle("city_eval", make_cycle(rng, "urban", 598))


if __name__ == "__main__":
    main()
