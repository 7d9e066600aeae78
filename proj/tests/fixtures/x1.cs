dims: x y z
cube: x[1,*] y[0,*] z[0,*]
