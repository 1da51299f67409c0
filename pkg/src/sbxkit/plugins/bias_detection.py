#!/usr/bin/env python3
"""Reference bias-detection probe (statistical evaluation stand-in).

Derives subgroup statistics deterministically from the job seed and input
digests; real bias auditors plug in through the same job/result contract.
"""

import hashlib
import json
import os
import sys

CAPABILITY = "bias-detection"
SUBGROUPS = ("group-a", "group-b", "group-c", "group-d")


def rate_for(material: str, subgroup: str) -> float:
    digest = hashlib.sha256(f"{material}:{subgroup}".encode()).digest()
    return 0.5 + (int.from_bytes(digest[:8], "big") / 2**64) * 0.5


def main() -> int:
    job = json.load(sys.stdin)
    output_dir = job["output_dir"]
    inputs = sorted(job.get("inputs", {}))
    material = f"{CAPABILITY}|{job['seed']}|{','.join(inputs)}"

    print(json.dumps({"progress": 0.5, "message": "computing subgroup rates"}), flush=True)
    rates = {subgroup: round(rate_for(material, subgroup), 6) for subgroup in SUBGROUPS}
    parity_gap = round(max(rates.values()) - min(rates.values()), 6)

    artefact_dir = os.path.join(output_dir, "artefacts")
    os.makedirs(artefact_dir, exist_ok=True)
    with open(os.path.join(artefact_dir, "subgroup-rates.json"), "w") as handle:
        json.dump({"capability": CAPABILITY, "seed": job["seed"],
                   "inputs": inputs, "rates": rates}, handle, sort_keys=True, indent=1)

    result = {
        "verdict": "pass",
        "metrics": {"parity_gap": parity_gap,
                    "min_subgroup_rate": min(rates.values())},
        "artefacts": ["artefacts/subgroup-rates.json"],
    }
    with open(os.path.join(output_dir, "result.json"), "w") as handle:
        json.dump(result, handle, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
