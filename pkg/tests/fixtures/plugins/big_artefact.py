#!/usr/bin/env python3
"""Writes a deliberately oversized artefact to trip the storage budget."""
import json
import os
import sys

job = json.load(sys.stdin)
path = os.path.join(job["output_dir"], "blob.bin")
with open(path, "wb") as handle:
    handle.write(b"x" * (job["budget"]["storage_bytes"] + 1024))
with open(os.path.join(job["output_dir"], "result.json"), "w") as handle:
    json.dump({"verdict": "pass", "metrics": {}, "artefacts": ["blob.bin"]}, handle)
