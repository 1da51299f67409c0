#!/usr/bin/env python3
"""Reference noise-perturbation robustness probe.

Deterministic stand-in for a real perturbation tester: derives its metrics
and artefacts purely from the job seed and input digests, so repeated runs
on any executor produce byte-identical outputs.
"""

import hashlib
import json
import os
import sys

CAPABILITY = "noise-perturbation"


def derive(seed_material: str, count: int) -> list[float]:
    values = []
    for i in range(count):
        digest = hashlib.sha256(f"{seed_material}:{i}".encode()).digest()
        values.append(int.from_bytes(digest[:8], "big") / 2**64)
    return values


def main() -> int:
    job = json.load(sys.stdin)
    output_dir = job["output_dir"]
    inputs = sorted(job.get("inputs", {}))
    material = f"{CAPABILITY}|{job['seed']}|{','.join(inputs)}"

    print(json.dumps({"progress": 0.1, "message": "generating perturbations"}), flush=True)
    samples = derive(material, 32)
    print(json.dumps({"progress": 0.8, "message": "scoring stability"}), flush=True)

    stability = 1.0 - (sum(samples) / len(samples)) * 0.2
    worst_case = 1.0 - max(samples) * 0.5

    artefact_dir = os.path.join(output_dir, "artefacts")
    os.makedirs(artefact_dir, exist_ok=True)
    with open(os.path.join(artefact_dir, "perturbation-report.json"), "w") as handle:
        json.dump({"capability": CAPABILITY, "seed": job["seed"],
                   "inputs": inputs, "samples": samples}, handle,
                  sort_keys=True, indent=1)

    result = {
        "verdict": "pass",
        "metrics": {"stability_score": round(stability, 6),
                    "worst_case_score": round(worst_case, 6)},
        "artefacts": ["artefacts/perturbation-report.json"],
    }
    with open(os.path.join(output_dir, "result.json"), "w") as handle:
        json.dump(result, handle, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
