from cryptography.fernet import Fernet

box = Fernet(b"fixture-key")
