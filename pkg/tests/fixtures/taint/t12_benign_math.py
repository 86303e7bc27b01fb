import math

value = math.sqrt(16)
result = value * 2
print(result)
