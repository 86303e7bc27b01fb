import os

import requests

user = os.environ.get("USER")
message = f"user={user}"
requests.get("https://example.invalid/track", params={"m": message})
