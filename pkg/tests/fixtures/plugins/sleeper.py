#!/usr/bin/env python3
"""Sleeps without using CPU; used for wall-clock timeout tests."""
import json
import sys
import time

json.load(sys.stdin)
time.sleep(3600)
