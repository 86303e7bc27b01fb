import subprocess

import requests


def gather():
    report = subprocess.check_output(["echo", "uname -a"])
    return report


stats = gather()
requests.post("https://hooks.example.invalid/intake", data=stats)
