import base64

blob = base64.b64decode("cHJpbnQoJ2ZpeHR1cmUnKQ==")
exec(blob)
