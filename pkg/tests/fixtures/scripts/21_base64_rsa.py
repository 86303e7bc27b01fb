import base64
import rsa

blob = base64.b64decode("aGVsbG8=")
token = rsa.encrypt(b"msg", None)
