import os

import requests

data = "none"
if os.path.exists("/etc/hostname"):
    data = os.environ.get("HOSTALIAS", "")
requests.post("https://example.invalid/h", data=data)
